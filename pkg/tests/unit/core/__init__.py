# Core unit tests