#!/usr/bin/env python3
"""
Celery worker entry point for distributed simulation batches.
Run: celery -A celery_worker worker -Q simulation --loglevel=info
"""

import os
import sys

# Add current directory to Python path
sys.path.insert(0, os.path.dirname(__file__))

from infrastructure.logging.config import setup_logging
from domain.services.background_service import celery_app

setup_logging()

if __name__ == "__main__":
    celery_app.start()
