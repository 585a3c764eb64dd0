class WordlocError(Exception):
    pass


class InputError(WordlocError, ValueError):
    """Malformed or invalid user input (bad numbers, non-simple faces)."""


class DegenerateInputError(InputError):
    """Input whose geometry collapses: identical coordinates, zero-area faces."""


class OutOfRangeError(WordlocError, ValueError):
    pass


class LayoutError(WordlocError, ValueError):
    pass


class PackingError(WordlocError, ValueError):
    pass


class BuildError(WordlocError):
    pass


class CorruptIndexError(WordlocError):
    pass
