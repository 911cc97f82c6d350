"""
Make sure we show a decent error if the numerical stack is missing or too old
"""
try:
    import numpy
    import scipy
except ModuleNotFoundError as err:
    raise RuntimeError(
        """
        Not all requirements of Bose Bounds are installed. Please do
            pip install -r requirements.txt
        Before continuing.
        """
    ) from err

__version__ = "0.1.0"

MINIMUM_NUMPY = (1, 21)
MINIMUM_SCIPY = (1, 7)


def _version_tuple(version):
    return tuple(int(part) for part in version.split(".")[:2] if part.isdigit())


def require_versions(numpy_version, scipy_version):
    if _version_tuple(numpy_version) < MINIMUM_NUMPY or _version_tuple(scipy_version) < MINIMUM_SCIPY:
        raise RuntimeError(
            "Bose Bounds needs numpy >= {} and scipy >= {}, found numpy {} and scipy {}".format(
                ".".join(map(str, MINIMUM_NUMPY)),
                ".".join(map(str, MINIMUM_SCIPY)),
                numpy_version,
                scipy_version,
            )
        )


require_versions(numpy.__version__, scipy.__version__)
