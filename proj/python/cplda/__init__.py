"""Python bindings for the cplda C++ library.

Tensors are numpy arrays; they are read in Fortran order so the first index
varies fastest, matching the library's storage.
"""

from ._core import (  # noqa: F401
    Error,
    IoError,
    bayes_error,
    cp_compose,
    fit_cp,
    mode_product,
    predict,
    preset_names,
    read_dten,
    run_preset,
    sample_discriminant,
    sample_tensor_normal,
    thin_svd,
    unfold,
    write_dten,
)
