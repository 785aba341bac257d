"""Builds the optional Cython tick-kernel extension.

The package works without the extension (a pure-Python twin is selected
at import time), so a failed extension build degrades rather than breaks
the install.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "instrex.kernels._core",
                ["src/instrex/kernels/_core.pyx"],
                # -ffp-contract=off keeps float results bit-identical to
                # the pure-Python twin (no FMA fusion); the no-builtin
                # flags stop GCC from fusing sin/cos pairs into glibc
                # sincos, whose results differ from separate calls by 1 ulp.
                extra_compile_args=["-O3", "-ffp-contract=off",
                                    "-fno-builtin-sin", "-fno-builtin-cos"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
