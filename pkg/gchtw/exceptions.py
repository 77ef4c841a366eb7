"""Errors raised by the gchtw library.

Every error carries the process exit status the management commands
report for it, so the CLI never has to know which module raised.
"""

EXIT_USAGE = 64


class GchError(Exception):
    exit_code = 1


class InvalidParameters(GchError):
    exit_code = EXIT_USAGE


class NotAnEquilibrium(GchError):
    exit_code = EXIT_USAGE


class NotASaddle(GchError):
    exit_code = 2


class NoSaddleFound(GchError):
    exit_code = 2


class SingularDegeneracy(GchError):
    exit_code = 2


class NoContinuousAssembly(GchError):
    exit_code = 3

    def __init__(self, message):
        super().__init__(
            f"{message}; try --strategy matched with --a1, or give a --target value"
        )


class Resonance(GchError):
    exit_code = 4

    def __init__(self, k, value):
        self.k = k
        self.value = value
        super().__init__(f"Linear factor F vanishes at order k={k} (F={value:.3e})")


class VerificationFailed(GchError):
    exit_code = 5


class UnsupportedEquation(GchError):
    exit_code = EXIT_USAGE


class InvalidFamily(GchError):
    exit_code = EXIT_USAGE


class IllConditioned(GchError):
    pass


class DivergenceError(GchError):
    pass


class NoRoot(GchError):
    pass
