"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (pure fallbacks are selected at
import time), so a failed compile degrades to a source-only install
instead of breaking it.
"""
import sys

from setuptools import Extension, setup


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("cqarank: Cython unavailable, building without native kernels", file=sys.stderr)
        return []
    ext = Extension(
        "cqarank._kernels._native",
        ["src/cqarank/_kernels/_native.pyx"],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions())
