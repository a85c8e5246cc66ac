"""Exception hierarchy; the CLI maps each class to its own exit code."""


class SctsaError(Exception):
    exit_code = 1


class ConfigError(SctsaError, ValueError):
    exit_code = 2


class DataError(SctsaError, ValueError):
    exit_code = 3


class BudgetError(SctsaError, RuntimeError):
    exit_code = 4
