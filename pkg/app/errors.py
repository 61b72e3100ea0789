class ToolkitError(Exception):
    exit_code = 1

    def __init__(self, detail: str, exit_code: int = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class DomainError(ToolkitError, ValueError):
    pass


class ConfigError(ToolkitError, ValueError):
    exit_code = 2


class KeyFormatError(ConfigError):
    pass


class NonBijectiveError(ToolkitError):
    def __init__(self, n: int, source: int, other: int, target: int):
        super().__init__(
            f"Permutation on {n}x{n} grid is not a bijection: sources {other} and {source} "
            f"both map to {target}"
        )
        self.n = n
        self.source = source
        self.other = other
        self.target = target


class DimensionMismatchError(ToolkitError, ValueError):
    pass


class HeaderMismatchError(ToolkitError):
    pass


class TruncatedDataError(ToolkitError):
    pass


class ImageFormatError(ToolkitError):
    pass
