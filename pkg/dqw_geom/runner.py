"""Run modes behind the command-line driver and their file output."""
import json
import logging
import os
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from .config import RunConfig
from .connection import walk_connection
from .curvature import convergence_study, mixed_to_coordinate, ricci_scalar, rho_slow, rho_star
from .errors import ConfigError
from .geometry import build_geometry
from .lattice import Lattice
from .lorentz import boost_connection, lorentz_field
from .walk import SpinorSlice, gaussian_state, point_state, random_state, run, state_from_file, uniform_state

logger = logging.getLogger(__name__)

SITE_KEYS = ('j', 'p')


def initial_state(cfg: RunConfig) -> SpinorSlice:
    init, lat = cfg.initial, cfg.lattice
    if init.kind == 'point':
        return point_state(lat, init.p, init.component)
    if init.kind == 'gaussian':
        return gaussian_state(lat, init.center, init.width, init.momentum)
    if init.kind == 'uniform':
        return uniform_state(lat)
    if init.kind == 'random':
        return random_state(lat, init.seed)
    return state_from_file(init.path, lat)


def _complex_columns(df: pd.DataFrame, name: str, values: np.ndarray) -> None:
    df[f"{name}_re"] = np.real(values).ravel()
    df[f"{name}_im"] = np.imag(values).ravel()


def _site_frame(n: int, P: int) -> pd.DataFrame:
    j, p = np.meshgrid(np.arange(n), np.arange(P), indexing='ij')
    return pd.DataFrame({'j': j.ravel(), 'p': p.ravel()})


# --- modes ---

def simulate(cfg: RunConfig) -> Dict[str, pd.DataFrame]:
    lat = cfg.lattice
    n_steps = lat.J - 1 if cfg.mode.n_steps is None else cfg.mode.n_steps
    history = run(initial_state(cfg), cfg.theta, lat, n_steps)
    norms = pd.DataFrame({'j': np.arange(history.norms.size), 'norm': history.norms})
    logger.info("simulated %d steps, max norm drift %.3e", n_steps, history.max_norm_drift())
    tables = {'norms': norms}
    if 'states' in cfg.output.fields:
        tables['states'] = history.to_frame()
    return tables


def geometry_mode(cfg: RunConfig) -> Dict[str, pd.DataFrame]:
    geometry = build_geometry(cfg.theta, cfg.lattice)
    return {'geometry': geometry.to_frame()}


def connection_mode(cfg: RunConfig) -> Dict[str, pd.DataFrame]:
    conn = walk_connection(build_geometry(cfg.theta, cfg.lattice))
    n = conn.valid
    df = _site_frame(n, cfg.lattice.P)
    _complex_columns(df, 'A0_mm', conn.A.A0.data[:n, :, 0, 0])
    _complex_columns(df, 'B0_mm', conn.B.B0.data[:n, :, 0, 0])
    _complex_columns(df, 'mass_bar', conn.mass_bar[:n])
    _complex_columns(df, 'mass_squared', conn.mass_squared()[:n])
    return {'connection': df}


def curvature_mode(cfg: RunConfig) -> Dict[str, pd.DataFrame]:
    lat = cfg.lattice
    geometry = build_geometry(cfg.theta, lat)
    conn = walk_connection(geometry)
    rho = rho_slow(conn.A, conn.B)
    n = rho.valid
    df = _site_frame(n, lat.P)
    df['rho_s'] = rho.data.ravel()
    df['rho_s_imag'] = rho.residue.ravel()
    R_coord = mixed_to_coordinate(rho, geometry.E)
    df['R_coord'] = R_coord.data.ravel()
    df['ricci'] = ricci_scalar(R_coord, geometry.g_inv).data.ravel()
    if cfg.mode.lambda_star is not None:
        lam = lorentz_field(cfg.mode.lambda_star, lat)
        A_ref, B_ref = boost_connection(conn.A, conn.B, lam)
        star = rho_star(conn.A, conn.B, A_ref, B_ref)
        df['rho_star'] = star.data[:n].ravel()
        df['rho_star_imag'] = star.residue[:n].ravel()
    logger.info("curvature on %d slices, max |rho_s| %.3e", n, float(np.nanmax(np.abs(rho.data))) if n else 0.0)
    return {'curvature': df}


def converge_mode(cfg: RunConfig) -> Dict[str, pd.DataFrame]:
    if cfg.theta.kind == 'full':
        raise ConfigError(['mode.name: converge needs a theta that depends on t only'])
    table = convergence_study(cfg.theta, cfg.mode.eps_list, cfg.mode.t_probe, cfg.mode.probe_P)
    return {'convergence': table}


MODE_RUNNERS = {
    'simulate': simulate,
    'geometry': geometry_mode,
    'connection': connection_mode,
    'curvature': curvature_mode,
    'converge': converge_mode,
}


# --- output ---

def _select(df: pd.DataFrame, fields: List[str], name: str) -> pd.DataFrame:
    wanted = [f for f in fields if f != 'states']
    if not wanted:
        return df
    missing = [f for f in wanted if f not in df.columns]
    if missing:
        raise ConfigError([f"output.fields: {', '.join(missing)} not produced by the {name} table"])
    keys = [c for c in df.columns if c in SITE_KEYS or c == 'eps']
    return df[keys + [f for f in wanted if f not in keys]]


def header(lat: Lattice, mode: str, df: pd.DataFrame) -> Dict[str, object]:
    meta = {'mode': mode, 'P': lat.P, 'J': lat.J, 'eps': lat.eps, 'rows': int(len(df))}
    if 'j' in df.columns and len(df):
        meta['valid_slices'] = int(df['j'].max()) + 1
    return meta


def _json_ready(values: np.ndarray) -> list:
    out = np.asarray(values, dtype=object)
    out[pd.isna(out)] = None
    return out.tolist()


def save(df: pd.DataFrame, out_path: str, meta: Dict[str, object], fmt: str = 'csv') -> None:
    """CSV with a '#' metadata line, or JSON with metadata and nested (j, p) arrays."""
    os.makedirs(os.path.dirname(out_path) or '.', exist_ok=True)
    if fmt == 'csv':
        with open(out_path, 'w', encoding='utf-8', newline='') as fh:
            fh.write('# ' + ' '.join(f"{k}={v}" for k, v in meta.items()) + '\n')
            df.to_csv(fh, index=False)
        return
    data = {}
    site_table = set(SITE_KEYS) <= set(df.columns)
    n_j = meta.get('valid_slices', 0)
    for column in df.columns:
        if site_table and column in SITE_KEYS:
            continue
        values = df[column].to_numpy()
        if site_table:
            values = values.reshape(n_j, -1)
        data[column] = _json_ready(values)
    with open(out_path, 'w', encoding='utf-8') as fh:
        json.dump({'metadata': meta, 'data': data}, fh, sort_keys=True, indent=1)


def run_mode(cfg: RunConfig, mode: Optional[str] = None, out_dir: Optional[str] = None) -> Dict[str, str]:
    """Run one mode and write its tables; returns {table name: path}."""
    if mode is not None:
        cfg = cfg.with_mode(mode)
    if out_dir is not None:
        cfg = cfg.with_output_dir(out_dir)
    name = cfg.mode.name
    tables = MODE_RUNNERS[name](cfg)
    written = {}
    for table, df in tables.items():
        if table != 'states':
            df = _select(df, list(cfg.output.fields), table)
        path = os.path.join(cfg.output.dir, f"{table}.{cfg.output.format}")
        save(df, path, header(cfg.lattice, name, df), cfg.output.format)
        written[table] = path
        logger.debug("wrote %s (%d rows)", path, len(df))
    return written
