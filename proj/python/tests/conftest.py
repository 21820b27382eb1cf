import pytest

try:
    import relaxforge  # noqa: F401
except ImportError as exc:  # module not built; reported as skipped by ctest
    pytest.exit(f"relaxforge is not installed: {exc}", returncode=77)
