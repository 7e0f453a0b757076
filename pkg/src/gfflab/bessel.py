"""Bessel functions J0 and J1 of real argument.

Vectorised port of the Cephes rational approximations (S. L. Moshier): a
rational fit on ``|x| <= 5`` and the Hankel asymptotic form with rational
amplitude/phase corrections beyond. Absolute error is a few ulp on the whole
real line, which is what the closed-form circle and disk integrals need.
"""

import numpy as np

_SQ2OPI = 7.9788456080286535587989e-1  # sqrt(2/pi)
_PIO4 = 7.85398163397448309616e-1
_THPIO4 = 2.35619449019234492885

# J0, |x| <= 5
_J0_RP = (-4.79443220978201773821e9, 1.95617491946556577543e12,
          -2.49248344360967716204e14, 9.70862251047306323952e15)
_J0_RQ = (4.99563147152651017219e2, 1.73785401676374683123e5,
          4.84409658339962045305e7, 1.11855537045356834862e10,
          2.11277520115489217587e12, 3.10518229857422583814e14,
          3.18121955943204943306e16, 1.71086294081043136091e18)
_J0_DR1 = 5.78318596294678452118e0
_J0_DR2 = 3.04712623436620863991e1

# J0, |x| > 5
_J0_PP = (7.96936729297347051624e-4, 8.28352392107440799803e-2,
          1.23953371646414299388e0, 5.44725003058768775090e0,
          8.74716500199817011941e0, 5.30324038235394892183e0,
          9.99999999999999997821e-1)
_J0_PQ = (9.24408810558863637013e-4, 8.56288474354474431428e-2,
          1.25352743901058953537e0, 5.47097740330417105182e0,
          8.76190883237069594232e0, 5.30605288235394617618e0,
          1.00000000000000000218e0)
_J0_QP = (-1.13663838898469149931e-2, -1.28252718670509318512e0,
          -1.95539544257735972385e1, -9.32060152123768231369e1,
          -1.77681167980488050595e2, -1.47077505154951170175e2,
          -5.14105326766599330220e1, -6.05014350600728481186e0)
_J0_QQ = (6.43178256118178023184e1, 8.56430025976980587198e2,
          3.88240183605401609683e3, 7.24046774195652478189e3,
          5.93072701187316984827e3, 2.06209331660327847417e3,
          2.42005740240291393179e2)

# J1, |x| <= 5
_J1_RP = (-8.99971225705559398224e8, 4.52228297998194034323e11,
          -7.27494245221818276015e13, 3.68295732863852883286e15)
_J1_RQ = (6.20836478118054335476e2, 2.56987256757748830383e5,
          8.35146791431949253037e7, 2.21511595479792499675e10,
          4.74914122079991414898e12, 7.84369607876235854894e14,
          8.95222336184627338078e16, 5.32278620332680085395e18)
_J1_Z1 = 1.46819706421238932572e1
_J1_Z2 = 4.92184563216946036703e1

# J1, |x| > 5
_J1_PP = (7.62125616208173112003e-4, 7.31397056940917570436e-2,
          1.12719608129684925192e0, 5.11207951146807644818e0,
          8.42404590141772420927e0, 5.21451598682361504063e0,
          1.00000000000000000254e0)
_J1_PQ = (5.71323128072548699714e-4, 6.88455908754495404082e-2,
          1.10514232634061696926e0, 5.07386386128601488557e0,
          8.39985554327604159757e0, 5.20982848682361821619e0,
          9.99999999999999997461e-1)
_J1_QP = (5.10862594750176621635e-2, 4.98213872951233449420e0,
          7.58238284132545283818e1, 3.66779609360150777800e2,
          7.10856304998926107277e2, 5.97489612400613639965e2,
          2.11688757100572135698e2, 2.52070205858023719784e1)
_J1_QQ = (7.42373277035675149943e1, 1.05644886038262816351e3,
          4.98641058337653607651e3, 9.56231892404756170795e3,
          7.99704160447350683650e3, 2.82619278517639096600e3,
          3.36093607810698293419e2)


def _polevl(x, coef):
    ans = np.full_like(x, coef[0])
    for c in coef[1:]:
        ans = ans * x + c
    return ans


def _p1evl(x, coef):
    # leading coefficient is an implicit 1
    ans = x + coef[0]
    for c in coef[1:]:
        ans = ans * x + c
    return ans


def _j0_small(x):
    z = x * x
    return (z - _J0_DR1) * (z - _J0_DR2) * _polevl(z, _J0_RP) / _p1evl(z, _J0_RQ)


def _j0_large(x):
    w = 5.0 / x
    q = w * w
    p = _polevl(q, _J0_PP) / _polevl(q, _J0_PQ)
    q = _polevl(q, _J0_QP) / _p1evl(q, _J0_QQ)
    xn = x - _PIO4
    return _SQ2OPI * (p * np.cos(xn) - w * q * np.sin(xn)) / np.sqrt(x)


def _j1_small(x):
    z = x * x
    return x * (z - _J1_Z1) * (z - _J1_Z2) * _polevl(z, _J1_RP) / _p1evl(z, _J1_RQ)


def _j1_large(x):
    w = 5.0 / x
    z = w * w
    p = _polevl(z, _J1_PP) / _polevl(z, _J1_PQ)
    q = _polevl(z, _J1_QP) / _p1evl(z, _J1_QQ)
    xn = x - _THPIO4
    return _SQ2OPI * (p * np.cos(xn) - w * q * np.sin(xn)) / np.sqrt(x)


def _piecewise(x, small, large):
    small_mask = x <= 5.0
    out = np.empty_like(x)
    if small_mask.all():
        out[...] = small(x)
    elif not small_mask.any():
        out[...] = large(x)
    else:
        out[small_mask] = small(x[small_mask])
        big = ~small_mask
        out[big] = large(x[big])
    return out


def j0(x):
    """Bessel function of the first kind of order zero."""
    arr = np.abs(np.asarray(x, dtype=float))
    scalar = arr.ndim == 0
    out = _piecewise(np.atleast_1d(arr), _j0_small, _j0_large)
    return float(out[0]) if scalar else out


def j1(x):
    """Bessel function of the first kind of order one (odd in ``x``)."""
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    flat = np.atleast_1d(arr)
    out = np.sign(flat) * _piecewise(np.abs(flat), _j1_small, _j1_large)
    return float(out[0]) if scalar else out
