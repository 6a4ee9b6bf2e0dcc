"""Dependency injection configuration"""

from domain.repositories.artifact_repository import IArtifactRepository
from domain.services.bound_service import BoundService
from domain.services.decoder_service import DecoderService
from domain.services.design_service import DesignService
from domain.services.export_service import ExportService
from domain.services.outer_code_service import OuterCodeService
from domain.services.polar_service import PolarService
from domain.services.repro_service import ReproService
from domain.services.simulation_service import SimulationService
from domain.services.wef_service import WefService
from infrastructure.storage.file_repository import FileArtifactRepository


class DependencyContainer:
    """Simple DI container: services built lazily and shared"""

    def __init__(self):
        self._instances = {}

    def _get(self, name: str, factory):
        if name not in self._instances:
            self._instances[name] = factory()
        return self._instances[name]

    @property
    def polar_service(self) -> PolarService:
        return self._get("polar", PolarService)

    @property
    def artifact_repository(self) -> IArtifactRepository:
        return self._get("repository", lambda: FileArtifactRepository(self.polar_service))

    @property
    def design_service(self) -> DesignService:
        return self._get("design", lambda: DesignService(self.artifact_repository))

    @property
    def wef_service(self) -> WefService:
        return self._get("wef", lambda: WefService(self.polar_service))

    @property
    def bound_service(self) -> BoundService:
        return self._get("bound", BoundService)

    @property
    def outer_code_service(self) -> OuterCodeService:
        return self._get("outer", lambda: OuterCodeService(self.polar_service, self.wef_service))

    @property
    def decoder_service(self) -> DecoderService:
        return self._get("decoder", lambda: DecoderService(self.polar_service, self.outer_code_service))

    @property
    def simulation_service(self) -> SimulationService:
        return self._get("simulation", lambda: SimulationService(
            self.polar_service, self.outer_code_service, self.decoder_service, self.bound_service
        ))

    @property
    def export_service(self) -> ExportService:
        return self._get("export", ExportService)

    @property
    def repro_service(self) -> ReproService:
        return self._get("repro", lambda: ReproService(
            self.polar_service, self.design_service, self.wef_service, self.bound_service,
            self.outer_code_service, self.decoder_service, self.simulation_service,
        ))


container = DependencyContainer()
