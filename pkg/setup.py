import os
import sys

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("IAMOD_CODESIGN_NO_EXT", "") in ("", "0"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        sys.stderr.write("Cython not found; installing the pure-Python kernel only\n")
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "iamod_codesign.lp._ctableau",
                    ["src/iamod_codesign/lp/_ctableau.pyx"],
                    extra_compile_args=["-O2"],
                )
            ],
            language_level=3,
        )

setup(ext_modules=ext_modules)
