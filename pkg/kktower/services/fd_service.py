"""
Finite-difference oracle

Leapfrog on the staggered grid z_j = (j - 1/2) h for
    d_t^2 Phi = d_z^2 Phi - (mu / z^2) Phi + (transverse part)
with an odd ghost at z = 0, a Dirichlet wall or the brane Robin closure at
the right end, and (for radial states) chi = r Phi with an odd ghost at r = 0.
"""

import logging
import math
from typing import Callable, List, Literal, Optional, Tuple

import numpy as np
from scipy import sparse

from kktower.core.errors import CFLError, NumericalBlowUpError, PreconditionError
from kktower.schemas.fd import CFL_LIMIT, FDConfig, FDRun
from kktower.schemas.fields import FieldState
from kktower.schemas.grids import QuadratureGrid
from kktower.schemas.params import ModelParams
from kktower.schemas.reports import VerificationReport
from kktower.services.quadrature_service import midpoint_grid

logger = logging.getLogger(__name__)

StateBuilder = Callable[[QuadratureGrid, Optional[QuadratureGrid]], FieldState]

ORDER_WINDOW = (1.7, 2.3)


def _check_midpoint(grid: QuadratureGrid, h: float, label: str) -> None:
    if grid.nodes_per_panel != 1 or grid.domain_start != 0.0:
        raise PreconditionError(f"{label} grid must be a staggered midpoint grid starting at 0")
    if abs(grid.panel_width - h) > 1e-9 * h:
        raise PreconditionError(f"{label} grid spacing {grid.panel_width} does not match h={h}")


def _second_difference(count: int, h: float, right_ghost: float) -> sparse.csr_matrix:
    """Three-point Laplacian with an odd ghost on the left and ghost = right_ghost * last on the right"""
    main = np.full(count, -2.0)
    main[0] = -3.0
    main[-1] = -2.0 + right_ghost
    off = np.ones(count - 1)
    return sparse.diags([off, main, off], [-1, 0, 1], format="csr") / h**2


def robin_ghost_factor(h: float) -> float:
    """Ghost/last ratio enforcing d_z Phi + (3/2) Phi = 0 midway between them"""
    return (1.0 - 0.75 * h) / (1.0 + 0.75 * h)


class FDOracle:
    """Second-order leapfrog solver used to cross-check the spectral towers"""

    @staticmethod
    def z_operator(z_grid: QuadratureGrid, params: ModelParams, config: FDConfig) -> sparse.csr_matrix:
        h = config.h_z
        right = robin_ghost_factor(h) if config.bc_right == "robin_3_2" else -1.0
        potential = sparse.diags(params.mu / z_grid.nodes**2)
        return (_second_difference(z_grid.size, h, right) - potential).tocsr()

    @staticmethod
    def operator(
        z_grid: QuadratureGrid,
        r_grid: Optional[QuadratureGrid],
        params: ModelParams,
        config: FDConfig,
        transverse_k: float = 0.0,
    ) -> sparse.csr_matrix:
        """Discrete right-hand side acting on Phi (1D) or on the flattened chi = r Phi (radial)"""
        lz = FDOracle.z_operator(z_grid, params, config)
        if r_grid is None:
            return (lz - transverse_k**2 * sparse.identity(z_grid.size)).tocsr()
        lr = _second_difference(r_grid.size, config.h_r, -1.0)
        return (sparse.kron(lr, sparse.identity(z_grid.size)) + sparse.kron(sparse.identity(r_grid.size), lz)).tocsr()

    @staticmethod
    def check_stability(op: sparse.csr_matrix, config: FDConfig) -> None:
        """Gershgorin bound dt^2 |L| <= 4 CFL_LIMIT^2, tighter than the geometric CFL near z = 0 when mu > 0"""
        bound = float(abs(op).sum(axis=1).max())
        limit = 4.0 * CFL_LIMIT**2
        if config.dt**2 * bound > limit:
            raise CFLError(
                f"dt={config.dt} violates the operator bound: dt^2 |L| = {config.dt**2 * bound:.3f} > {limit:.3f}"
            )

    @staticmethod
    def _cell_weights(state: FieldState, config: FDConfig) -> float:
        if state.is_radial:
            return 4.0 * math.pi * config.h_r * config.h_z
        return config.h_z

    @staticmethod
    def _midpoint_energy(u_old: np.ndarray, u_new: np.ndarray, op: sparse.csr_matrix, dt: float, cell: float) -> float:
        """sum h [ |(u_new - u_old) / dt|^2 + <u_new, -L u_old> ], conserved exactly for symmetric L"""
        velocity = (u_new - u_old) / dt
        coupling = np.vdot(u_new, -(op @ u_old)).real
        return float(cell * (np.vdot(velocity, velocity).real + coupling))

    @staticmethod
    def fd_evolve(state0: FieldState, params: ModelParams, config: FDConfig, save_every: int = 1) -> FDRun:
        """Leapfrog from the Cauchy data, saving every `save_every` steps and the final step"""
        config.check_cfl()
        z_grid, r_grid = state0.z_grid, state0.r_grid
        _check_midpoint(z_grid, config.h_z, "z")
        if config.bc_right == "robin_3_2" and abs(z_grid.domain_end - 1.0) > 1e-12:
            raise PreconditionError("the brane closure needs a z grid ending at 1")
        if state0.is_radial:
            if config.h_r is None:
                raise PreconditionError("radial states need h_r")
            _check_midpoint(r_grid, config.h_r, "r")
            r_col = r_grid.nodes[:, None]
            u0 = (r_col * state0.phi).ravel()
            v0 = (r_col * state0.dphi_dt).ravel()
        else:
            u0 = np.asarray(state0.phi).ravel()
            v0 = np.asarray(state0.dphi_dt).ravel()

        if config.bc_right == "none":
            edge = np.abs(np.asarray(state0.phi)[..., -1]).max()
            if edge > 1e-8 * max(np.abs(state0.phi).max(), 1e-300):
                logger.warning(f"Datum reaches the truncation wall (|phi| = {edge:.2e} at z={z_grid.nodes[-1]})")

        op = FDOracle.operator(z_grid, r_grid, params, config, state0.transverse_k)
        FDOracle.check_stability(op, config)
        cell = FDOracle._cell_weights(state0, config)
        dt = config.dt
        dtype = np.result_type(u0, v0, float)
        u0, v0 = u0.astype(dtype), v0.astype(dtype)

        def snapshot(t: float, u: np.ndarray, v: np.ndarray) -> FieldState:
            if state0.is_radial:
                shape = (r_grid.size, z_grid.size)
                r_col = r_grid.nodes[:, None]
                phi, dphi = u.reshape(shape) / r_col, v.reshape(shape) / r_col
            else:
                phi, dphi = u, v
            return FieldState(
                t=t, z_grid=z_grid, r_grid=r_grid, transverse_k=state0.transverse_k, phi=phi, dphi_dt=dphi
            )

        states: List[FieldState] = [snapshot(state0.t, u0, v0)]
        prev = u0
        cur = u0 + dt * v0 + 0.5 * dt**2 * (op @ u0)
        energies = [FDOracle._midpoint_energy(prev, cur, op, dt, cell)]
        for n in range(1, config.steps + 1):
            nxt = 2.0 * cur - prev + dt**2 * (op @ cur)
            if not np.all(np.isfinite(nxt)):
                logger.error(f"Leapfrog blew up at step {n} (t={state0.t + n * dt:.4f})")
                raise NumericalBlowUpError(f"non-finite values at step {n} of {config.steps}")
            if n % save_every == 0 or n == config.steps:
                states.append(snapshot(state0.t + n * dt, cur, (nxt - prev) / (2.0 * dt)))
            if n < config.steps:
                energies.append(FDOracle._midpoint_energy(cur, nxt, op, dt, cell))
            prev, cur = cur, nxt

        run = FDRun(config=config, states=states, midpoint_energy=np.array(energies))
        logger.info(f"FD run: {config.steps} steps, dt={dt:.3e}, energy drift {run.energy_drift:.2e}")
        return run

    @staticmethod
    def fd_energy(run: FDRun) -> Tuple[np.ndarray, np.ndarray]:
        """Midpoint times (n + 1/2) dt and the discrete energy at each"""
        t0 = run.states[0].t
        times = t0 + (np.arange(run.midpoint_energy.size) + 0.5) * run.config.dt
        return times, run.midpoint_energy

    @staticmethod
    def _restrict(values: np.ndarray, factor: int) -> np.ndarray:
        """Average blocks of `factor` cells along every axis onto the coarse cell centres"""
        out = values
        for axis in range(values.ndim):
            shape = out.shape[:axis] + (out.shape[axis] // factor, factor) + out.shape[axis + 1:]
            out = out.reshape(shape).mean(axis=axis + 1)
        return out

    @staticmethod
    def convergence_study(
        build_state: StateBuilder,
        params: ModelParams,
        z_end: float,
        h: float,
        t_final: float,
        refinements: int = 2,
        mode: Literal["space", "time"] = "space",
        courant: float = 0.5,
        r_end: Optional[float] = None,
        bc_right: Literal["none", "robin_3_2"] = "none",
        informational: bool = False,
    ) -> VerificationReport:
        """Observed order from successive L2 differences of the final states"""
        if refinements < 2:
            raise PreconditionError(f"a convergence study needs at least 2 refinements, got {refinements}")
        count_z = round(z_end / h)
        count_r = round(r_end / h) if r_end is not None else None
        base = FDConfig.for_final_time(h, t_final, courant, h_r=h if r_end else None, bc_right=bc_right)

        finals: List[np.ndarray] = []
        for level in range(refinements + 1):
            factor = 2**level
            space = factor if mode == "space" else 1
            z_grid = midpoint_grid(z_end, count_z * space)
            r_grid = midpoint_grid(r_end, count_r * space) if r_end is not None else None
            config = FDConfig(
                h_z=z_grid.panel_width,
                h_r=r_grid.panel_width if r_grid is not None else None,
                dt=base.dt / factor,
                steps=base.steps * factor,
                bc_right=bc_right,
            )
            run = FDOracle.fd_evolve(build_state(z_grid, r_grid), params, config, save_every=config.steps)
            finals.append(FDOracle._restrict(np.asarray(run.final.phi), space))

        cell = h * h if r_end is not None else h
        diffs = [math.sqrt(cell * float(np.sum(np.abs(a - b) ** 2))) for a, b in zip(finals, finals[1:])]
        orders = [math.log2(a / b) if a > 0 and b > 0 else float("nan") for a, b in zip(diffs, diffs[1:])]
        order = orders[-1]
        low, high = ORDER_WINDOW
        passed = math.isfinite(order) and low <= order <= high
        measured = {f"difference_{level}": value for level, value in enumerate(diffs)}
        measured.update({f"order_{level}": value for level, value in enumerate(orders) if math.isfinite(value)})
        logger.info(f"FD {mode} convergence: differences {diffs}, observed order {order:.3f}")
        return VerificationReport(
            check_name="convergence",
            passed=bool(passed),
            measured=measured,
            tolerance=high - 2.0,
            notes=f"{mode} refinement from h={h}, dt={base.dt:.4g}, t={t_final}",
            informational=informational,
        )

    @staticmethod
    def compare_with_spectral(
        fd_state: FieldState, spectral_state: FieldState, tolerance: float = 1e-3
    ) -> VerificationReport:
        """Relative L2 difference of two snapshots on the same grid"""
        if fd_state.z_grid.size != spectral_state.z_grid.size or fd_state.is_radial != spectral_state.is_radial:
            raise PreconditionError("FD and spectral snapshots must share their grids")
        w = fd_state.z_grid.weights
        if fd_state.is_radial:
            r = fd_state.r_grid
            w = (r.weights * r.nodes**2)[:, None] * w[None, :]
        diff = float(np.sum(w * np.abs(fd_state.phi - spectral_state.phi) ** 2))
        norm = float(np.sum(w * np.abs(spectral_state.phi) ** 2))
        relative = math.sqrt(diff / norm) if norm > 0 else math.sqrt(diff)
        logger.info(f"FD vs spectral at t={fd_state.t}: relative L2 difference {relative:.3e}")
        return VerificationReport(
            check_name="oracle",
            passed=relative < tolerance,
            measured={"relative_l2": relative, "t": fd_state.t},
            tolerance=tolerance,
            notes=f"{fd_state.z_grid.size} z cells" + (f", {fd_state.r_grid.size} r cells" if fd_state.is_radial else ""),
        )
