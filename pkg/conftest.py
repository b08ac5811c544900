"""Repository-level pytest bootstrap.

The bridge suite lives under bridge/tests, so pytest's importlib mode
derives module names starting with "bridge." for those files and would
register the repository directory under that name.  Importing the
installed package first keeps "bridge" pointing at the real package.
"""

try:
    import bridge  # noqa: F401
except ImportError:  # primary-only environments still run tests/
    pass
