"""Custom exceptions for the workbench"""

class BaseFecException(Exception):
    """Base exception class"""
    def __init__(self, message: str, error_code: str = None):
        self.message = message
        self.error_code = error_code
        super().__init__(message)

class ValidationException(BaseFecException):
    """Invalid argument: sizes, ranges, malformed specs"""
    pass

class ResourceLimitException(BaseFecException):
    """A configured budget (term count, enumeration size) would be exceeded"""
    pass

class ArtifactIOException(BaseFecException):
    """Reading or writing a spec, interleaver or result file failed"""
    pass

class IntegrationException(BaseFecException):
    """Exception for the distributed worker back end"""
    pass
