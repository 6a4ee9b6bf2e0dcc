from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import List, Optional

class Settings(BaseSettings):
    app_name: str = "ipolar-workbench"
    app_version: str = "0.1.0"

    # Weight enumerator analysis
    wef_term_budget: int = 5_000_000
    rational_max_block_len: int = 64
    exhaustive_max_k: int = 24

    # Decoding
    ml_bruteforce_max_k: int = 20
    concat_visit_cap: int = 4096
    llr_saturation: float = 1e30

    # Gaussian-approximation design
    j_sigma_max: float = 16.0
    j_table_step: float = 0.005
    design_snr_db: Optional[float] = None
    # Es/N0 (dB) reproducing the (32,16) reference set and the 1024-length multiplicities
    reference_design_snr_db: float = -1.3

    # Outer codes
    crc24c_exponents: Optional[List[int]] = None

    # Simulation
    sim_min_errors: int = 100
    sim_max_trials: int = 10_000_000
    sim_batch_size: int = 1000
    sim_jobs: int = 1
    sim_backend: str = "local"  # local|celery

    # Worker pool broker (celery back end only)
    redis_url: str = "redis://localhost:6379"

    # Debug
    debug: bool = False

    # Logging
    log_level: str = "info"
    log_dir: Optional[str] = None

    model_config = SettingsConfigDict(env_file=".env", env_prefix="IPOLAR_", extra="ignore")

settings = Settings()
