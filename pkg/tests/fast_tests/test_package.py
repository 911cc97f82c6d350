import pytest

from bose_code import require_versions


@pytest.mark.parametrize(
    "numpy_version, scipy_version",
    [("1.20.3", "1.7.3"), ("1.21.6", "1.6.0"), ("1.9.0", "1.10.1")],
)
def test_old_stack_is_refused(numpy_version, scipy_version):
    with pytest.raises(RuntimeError, match="numpy >= 1.21"):
        require_versions(numpy_version, scipy_version)


@pytest.mark.parametrize("numpy_version", ["1.21.0", "1.26.4", "2.0.0rc1"])
def test_supported_stack_is_accepted(numpy_version):
    require_versions(numpy_version, "1.7.3")
