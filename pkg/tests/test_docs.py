import doctest

import frame_complete


def test_package_docstring_examples():
    assert doctest.testmod(frame_complete).failed == 0
