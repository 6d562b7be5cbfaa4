"""Shared helpers for building random test fields."""

from nstorus import LatticeSpec, SpectralField, TimeSlicedField, get_lattice


def ball(k_max):
    return get_lattice(LatticeSpec(k_max))


def random_field(lat, rng, scale=1.0, solenoidal=True, sparsity=0.0):
    """Random complex field; solenoidal=True projects each site amplitude
    orthogonal to its wave vector."""
    n = len(lat)
    data = (rng.standard_normal((n, 3)) + 1j * rng.standard_normal((n, 3))) * scale
    if sparsity:
        data[rng.uniform(size=n) < sparsity] = 0.0
    if solenoidal:
        kf = lat.sites_f
        data = data - ((kf * data).sum(axis=1) / lat.norm_sq_f)[:, None] * kf
    return SpectralField(lat, data)


def random_sliced(lat, times, rng, scale=1.0):
    return TimeSlicedField(
        tuple(times), tuple(random_field(lat, rng, scale) for _ in times)
    )
