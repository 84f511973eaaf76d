import warnings

import numpy as np
from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the accelerator module, falling back to pure Python on failure."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # pragma: no cover - only on broken toolchains
            warnings.warn(
                "could not build the compiled kernels (%s); "
                "evrec will run on the NumPy fallback" % exc
            )

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # pragma: no cover
            warnings.warn(
                "could not build %s (%s); evrec will run on the NumPy fallback"
                % (ext.name, exc)
            )


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:  # pragma: no cover
        return []
    from setuptools import Extension

    ext = Extension(
        "evrec._kernels._speedups",
        ["src/evrec/_kernels/_speedups.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # -ffp-contract=off keeps the C arithmetic bit-identical to the
        # NumPy fallback (no FMA fusing).
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": OptionalBuildExt},
)
