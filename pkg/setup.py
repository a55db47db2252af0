"""Build script for the optional compiled simplex kernel.

The package works without the extension: ``tepflow.solver.simplex`` falls
back to the pure numpy kernel when the compiled module is missing, so a
failed build is downgraded to a warning rather than an install error.
"""

import sys

from setuptools import Extension, setup


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("warning: Cython unavailable, building without compiled kernel", file=sys.stderr)
        return []
    try:
        return cythonize(
            [
                Extension(
                    "tepflow.solver._simplex_cy",
                    ["src/tepflow/solver/_simplex_cy.pyx"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except Exception as exc:  # compiler missing, cythonize failure
        print(f"warning: skipping compiled kernel ({exc})", file=sys.stderr)
        return []


setup(ext_modules=extensions())
