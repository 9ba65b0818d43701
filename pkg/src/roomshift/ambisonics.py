# -*- coding: utf-8 -*-
"""Real spherical harmonics, direction algebra and tetrahedral steering.

Conventions used throughout the package:

* Cartesian frame is right-handed with +x front, +y left, +z up.
* Azimuth ``phi = atan2(y, x)`` in (-pi, pi], zenith ``zeta = arccos(z)``
  in [0, pi]. At the poles the azimuth is undefined and fixed to 0.
* Spherical-harmonic channels follow ACN ordering with orthonormal (N3D)
  scaling and no Condon-Shortley phase (ambiX convention).
"""

import math

import numpy as np

from .errors import ConfigError

#: Highest supported spherical-harmonic order.
MAX_ORDER = 7

#: Direction vectors of a regular tetrahedron in prototype orientation,
#: one direction per column, first column on the +x axis. Any two distinct
#: columns have dot product -1/3.
TETRAHEDRON = np.array([
    [1.0, -1.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0],
    [0.0, np.sqrt(2.0 / 3.0), 0.0, -np.sqrt(2.0 / 3.0)],
    [0.0, np.sqrt(2.0 / 9.0), -np.sqrt(8.0 / 9.0), np.sqrt(2.0 / 9.0)],
])


def n_channels(order):
    """Channel count of a full spherical-harmonic expansion of `order`."""
    return (order + 1) ** 2


def order_from_channels(channels):
    """Ambisonic order for a perfect-square channel count, else None."""
    order = int(round(np.sqrt(channels))) - 1
    if n_channels(order) != channels:
        return None
    return order


def cart_to_sph(directions):
    """Azimuth/zenith angles of Cartesian direction vectors.

    Parameters
    ----------
    directions : (..., 3) array_like
        Direction vectors, not necessarily unit length.

    Returns
    -------
    azimuth, zenith : ndarray
        Azimuth in (-pi, pi] (0 at the poles) and zenith in [0, pi].
    """
    d = np.asarray(directions, dtype=float)
    azimuth = np.arctan2(d[..., 1], d[..., 0])
    norm = np.linalg.norm(d, axis=-1)
    with np.errstate(invalid="ignore"):
        cosz = np.where(norm > 0, d[..., 2] / np.where(norm > 0, norm, 1.0), 1.0)
    zenith = np.arccos(np.clip(cosz, -1.0, 1.0))
    return azimuth, zenith


def sph_to_cart(azimuth, zenith):
    """Unit direction vectors from azimuth/zenith, shape (..., 3)."""
    azimuth = np.asarray(azimuth, dtype=float)
    zenith = np.asarray(zenith, dtype=float)
    sz = np.sin(zenith)
    return np.stack([sz * np.cos(azimuth), sz * np.sin(azimuth), np.cos(zenith)], axis=-1)


def _legendre(order, z):
    """Associated Legendre functions P_l^m(z) without Condon-Shortley phase.

    Returns an array indexed by [l, m, ...] with zeros where m > l.
    """
    shape = np.shape(z)
    p = np.zeros((order + 1, order + 1) + shape)
    z = np.asarray(z, dtype=float)
    s = np.sqrt(np.clip(1.0 - z * z, 0.0, None))  # sin(zenith) >= 0

    p[0, 0] = 1.0
    # diagonal: P_m^m = (2m-1)!! * s^m
    for m in range(1, order + 1):
        p[m, m] = (2 * m - 1) * s * p[m - 1, m - 1]
    # first off-diagonal: P_{m+1}^m = (2m+1) z P_m^m
    for m in range(order):
        p[m + 1, m] = (2 * m + 1) * z * p[m, m]
    # upward recurrence in l
    for m in range(order + 1):
        for l in range(m + 2, order + 1):
            p[l, m] = ((2 * l - 1) * z * p[l - 1, m] - (l + m - 1) * p[l - 2, m]) / (l - m)
    return p


def real_sh(order, directions):
    """Real spherical harmonics in ACN/N3D up to `order`.

    Parameters
    ----------
    order : int
        Maximum spherical-harmonic order, 0 <= order <= MAX_ORDER.
    directions : (..., 3) array_like
        Unit direction vectors.

    Returns
    -------
    y : (..., (order+1)**2) ndarray
        Orthonormal real spherical harmonics evaluated at the directions,
        ACN channel ordering.
    """
    if order < 0 or order > MAX_ORDER:
        raise ConfigError(f"spherical-harmonic order must be in [0, {MAX_ORDER}], got {order}")
    d = np.asarray(directions, dtype=float)
    azimuth, zenith = cart_to_sph(d)
    z = np.cos(zenith)

    p = _legendre(order, z)
    y = np.zeros(d.shape[:-1] + (n_channels(order),))
    for l in range(order + 1):
        for m in range(-l, l + 1):
            am = abs(m)
            norm = np.sqrt(
                (2 * l + 1)
                / (4.0 * np.pi)
                * math.factorial(l - am)
                / math.factorial(l + am)
            )
            if m == 0:
                trig = 1.0
            elif m > 0:
                trig = np.sqrt(2.0) * np.cos(m * azimuth)
            else:
                trig = np.sqrt(2.0) * np.sin(am * azimuth)
            y[..., l * l + l + m] = norm * p[l, am] * trig
    return y


def rotation_z(phi):
    """Rotation about +z by `phi` (counter-clockwise seen from above)."""
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_y(zeta):
    """Rotation about +y by `zeta`, with sin in the upper-right entry."""
    c, s = np.cos(zeta), np.sin(zeta)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def tetrahedron_prototype():
    """Copy of the prototype tetrahedral steering set, shape (3, 4)."""
    return TETRAHEDRON.copy()


def steer_tetrahedron(doa):
    """Tetrahedral steering set rotated so its first direction equals `doa`.

    The prototype's first column lies on +x (zenith pi/2); rotating by
    R_z(phi) R_y(zeta - pi/2) carries it to azimuth `phi` and zenith
    `zeta` of the requested direction while preserving all pairwise
    angles of the tetrahedron.

    Parameters
    ----------
    doa : (3,) array_like
        Unit direction of arrival.

    Returns
    -------
    steering : (3, 4) ndarray
        Steered tetrahedral directions, first column equal to `doa`.
    """
    phi, zeta = cart_to_sph(np.asarray(doa, dtype=float))
    return rotation_z(phi) @ rotation_y(zeta - np.pi / 2.0) @ TETRAHEDRON


def steering_rotations(azimuth, zenith):
    """Batched steering rotations R_z(azimuth) R_y(zenith - pi/2).

    Parameters
    ----------
    azimuth, zenith : (n,) array_like

    Returns
    -------
    r : (n, 3, 3) ndarray
    """
    azimuth = np.atleast_1d(np.asarray(azimuth, dtype=float))
    zenith = np.atleast_1d(np.asarray(zenith, dtype=float))
    ca, sa = np.cos(azimuth), np.sin(azimuth)
    cz, sz = np.cos(zenith - np.pi / 2.0), np.sin(zenith - np.pi / 2.0)
    r = np.empty((azimuth.shape[0], 3, 3))
    r[:, 0, 0] = ca * cz
    r[:, 0, 1] = -sa
    r[:, 0, 2] = ca * sz
    r[:, 1, 0] = sa * cz
    r[:, 1, 1] = ca
    r[:, 1, 2] = sa * sz
    r[:, 2, 0] = -sz
    r[:, 2, 1] = 0.0
    r[:, 2, 2] = cz
    return r


def sh_reencode_matrix(steering, order):
    """Spherical-harmonic encoding matrix of a steering set.

    Parameters
    ----------
    steering : (3, 4) array_like
        Tetrahedral steering directions, one per column.
    order : int

    Returns
    -------
    y : ((order+1)**2, 4) ndarray
        Column i holds ``real_sh(order, steering[:, i])``.
    """
    steering = np.asarray(steering, dtype=float)
    return real_sh(order, steering.T).T
