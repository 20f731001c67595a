"""Work done by a short force pulse on an underdamped Brownian particle."""

import numpy as np

from .errors import SimulationDivergenceError


def simulate_brownian_particle(m, lam, temp, f, dt_pulse, cfg, n_substeps=200):
    """Apply F = f / dt_pulse on [0, dt_pulse] to equilibrium velocities.

    Velocities follow m dv/dt = -lam v + xi + F with <xi xi'> = 2 lam T delta,
    stepped with the exact OU update under constant force. Initial velocities
    are drawn from N(0, T/m) in antithetic pairs (v0, -v0) with mirrored noise.

    Parameters
    ----------
    m, lam, temp : float
        Mass, damping and temperature (k_B = 1).
    f : float
        Momentum delivered by the pulse (force integral).
    dt_pulse : float
        Pulse duration.
    cfg : SimConfig
        Supplies seed, n_trajectories and block_size.
    n_substeps : int
        Integration steps across the pulse.

    Returns
    -------
    dict
        W     : per-trajectory work int F v dt
        v0    : initial velocities
        v_end : velocities at dt_pulse
    """
    if m <= 0 or lam <= 0 or temp <= 0:
        raise ValueError(f"m, lam and temp must be positive, got {m}, {lam}, {temp}")
    if dt_pulse <= 0:
        raise ValueError(f"dt_pulse must be positive, got {dt_pulse}")
    if n_substeps < 1:
        raise ValueError(f"n_substeps must be >= 1, got {n_substeps}")

    N = cfg.n_trajectories
    gamma = lam / m
    h = dt_pulse / n_substeps
    force = f / dt_pulse
    decay = np.exp(-gamma * h)
    drive = force / lam * (1.0 - decay)
    kick_sd = np.sqrt(temp / m * (1.0 - decay ** 2))

    W = np.empty(N)
    v0 = np.empty(N)
    v_end = np.empty(N)

    for b, lo in enumerate(range(0, N, cfg.block_size)):
        hi = min(lo + cfg.block_size, N)
        n_block = hi - lo
        half = (n_block + 1) // 2
        rng = np.random.default_rng([cfg.seed, 4, b])

        z0 = rng.standard_normal(half)
        kicks = rng.standard_normal((n_substeps, half))
        v = np.concatenate([z0, -z0])[:n_block] * np.sqrt(temp / m)
        noise = np.concatenate([kicks, -kicks], axis=1)[:, :n_block]

        v0[lo:hi] = v
        work = np.zeros(n_block)
        for k in range(n_substeps):
            v_next = v * decay + drive + kick_sd * noise[k]
            work += force * 0.5 * (v + v_next) * h
            v = v_next
        if not np.all(np.isfinite(v)):
            raise SimulationDivergenceError(lo + int(np.flatnonzero(~np.isfinite(v))[0]), n_substeps)
        W[lo:hi] = work
        v_end[lo:hi] = v

    return {'W': W, 'v0': v0, 'v_end': v_end}
