def f():
    """Docstring
    spans lines."""
    return 1
