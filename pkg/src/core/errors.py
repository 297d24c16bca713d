# src/core/errors.py


class LabError(RuntimeError):
    """Базовая ошибка лаборатории."""


class InputError(LabError, ValueError):
    """Неверные входные данные (длины, индексы кубитов, eps <= 0 ...)."""


class ConfigError(LabError):
    """Неверная конфигурация: лимит density-бэкенда, сценарий, флаги."""


class UnsupportedError(LabError):
    pass


class InternalError(LabError):
    """Нарушен внутренний инвариант (баг декомпозиции/компиляции)."""


class DegenerateFermiLevelError(UnsupportedError):
    pass
