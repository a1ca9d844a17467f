"""qcwt: two-sided quaternion Fourier and continuous wavelet transforms.

Quaternion-valued 2D signals, their two-sided quaternion Fourier
transform, the continuous wavelet transform over dilations, rotations
and translations, and a verification harness for the identities,
covariances and uncertainty inequalities the transforms satisfy.
"""

from .quaternion import (
    Quaternion,
    e0,
    e1,
    e2,
    e3,
    qconj,
    qinverse,
    qmodulus,
    qmul,
    quat_conj,
    quat_inverse,
    quat_modulus,
    quat_mul,
)
from .signal import (
    Grid2D,
    GridMismatchError,
    QSFFormatError,
    QSignal2D,
    SimGrid,
    inner_product,
    l2_norm,
    read_qsf,
    resample_similitude,
    write_qsf,
)
from .qft import (
    QSpectrum2D,
    check_rotation_identity,
    qft_direct_oracle,
    qft_forward,
    qft_inverse,
    spectral_derivative,
    spectral_laplacian,
    spectrum_l2_norm,
)
from .wavelet import (
    AdmissibilityError,
    GridTooSmallError,
    QWavelet,
    XiDependenceError,
    admissibility_constant,
    aqw_inner_product,
    daughter,
    daughter_spectrum,
    dgauss_wavelet,
    log_gaussian_wavelet,
)
from .cqwt import (
    QCWFormatError,
    Scalogram,
    cqwt_direct,
    cqwt_fast,
    cqwt_inverse,
    cqwt_roundtrip,
    export_csv,
    lp_bound_check,
    parseval_check,
    read_qcw,
    reproducing_kernel_check,
    write_qcw,
)
from .uncertainty import (
    EULER_GAMMA,
    LOG_UP_CONSTANT,
    LOG_UP_CONSTANT_DIM2,
    UPReport,
    UnclassifiableError,
    hardy_classify,
    heisenberg_cqwt_ratio,
    heisenberg_lemma_check,
    heisenberg_qft_ratio,
    log_up_check,
)

__version__ = "0.1.0"
