import os

from setuptools import setup

if os.environ.get("BNSIM_PURE"):
    # skip the extension; the package falls back to the Python kernels
    setup()
else:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext = Extension(
        "bnsim._kernels",
        ["src/bnsim/_kernels.pyx"],
        include_dirs=[np.get_include()],
        # contraction off keeps the kernel bit-identical to the Python
        # fallback (no fused multiply-add)
        extra_compile_args=["-O3", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    setup(ext_modules=cythonize([ext],
                                compiler_directives={"language_level": "3"}))
