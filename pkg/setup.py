# Builds the optional compiled kernels; the package falls back to pure Python
# when the extension is missing (see casecart/kernel/calendar.py).
import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("CASECART_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "casecart.kernel._ccalendar",
                    ["src/casecart/kernel/_ccalendar.pyx"],
                    extra_compile_args=["-O3"],
                ),
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
