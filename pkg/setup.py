"""Build the optional compiled kernels; the package falls back to numpy without them."""
import os
import platform

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("UCCDECOMP_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        flags = ["-O3", "-fcx-limited-range"]
        if platform.machine().lower() in ("x86_64", "amd64"):
            flags.append("-mpopcnt")  # hardware popcount for the parity kernels
        ext_modules = cythonize(
            [Extension("uccdecomp._kernels", ["src/uccdecomp/_kernels.pyx"], extra_compile_args=flags)],
            compiler_directives={"language_level": 3},
        )

setup(ext_modules=ext_modules)
