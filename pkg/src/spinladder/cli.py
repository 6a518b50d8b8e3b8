"""Command-line client for the exact-diagonalization service.

The CLI builds the same request models the HTTP API accepts and executes them
either in process (default) or against a running server (``--url``), then
writes the returned tables as CSV files plus a JSON manifest.  Flag values win
over the optional config file, which wins over preset defaults.

Config file format (INI):

    [experiment]
    preset = fig1b
    L = 10
    D_list = 0.3, 3.0
    samples = 50
    grid = 0.1:1e4:20
"""

from __future__ import annotations

import configparser
import json
import sys
from pathlib import Path

import click
import httpx

from . import __version__
from .errors import SpinLadderError
from .service import schemas
from .service.app import (
    handle_duality,
    handle_experiment,
    handle_gap_ratio,
    handle_presets,
)
from .tables import SeriesTable, write_outputs

DEFAULT_TIMEOUT = 3600.0


class ServiceClient:
    """Executes request models in process (url=None) or over HTTP."""

    def __init__(self, url: str | None = None):
        self.url = url

    def _client(self) -> httpx.Client:
        return httpx.Client(base_url=self.url, timeout=DEFAULT_TIMEOUT)

    def _post(self, path: str, payload: dict) -> dict:
        with self._client() as client:
            response = client.post(path, json=payload)
            if response.status_code != 200:
                raise SpinLadderError(
                    f"service error {response.status_code}: {response.text}"
                )
            return response.json()

    def _get(self, path: str) -> dict:
        with self._client() as client:
            response = client.get(path)
            response.raise_for_status()
            return response.json()

    def run_experiment(self, request: schemas.ExperimentRequest) -> schemas.ExperimentResponse:
        if self.url is None:
            return handle_experiment(request)
        return schemas.ExperimentResponse(
            **self._post("/experiments/run", request.model_dump(exclude_none=True))
        )

    def duality(self, request: schemas.DualityRequest) -> schemas.DualityResponse:
        if self.url is None:
            return handle_duality(request)
        return schemas.DualityResponse(
            **self._post("/duality", request.model_dump(exclude_none=True))
        )

    def gap_ratio(self, request: schemas.GapRatioRequest) -> schemas.GapRatioResponse:
        if self.url is None:
            return handle_gap_ratio(request)
        return schemas.GapRatioResponse(
            **self._post("/gap-ratio", request.model_dump(exclude_none=True))
        )

    def presets(self) -> list[schemas.PresetInfo]:
        if self.url is None:
            return handle_presets()
        return [schemas.PresetInfo(**p) for p in self._get("/presets")]


def _parse_grid(value: str) -> schemas.GridOverride:
    try:
        tmin, tmax, ppd = value.split(":")
        return schemas.GridOverride(
            tmin=float(tmin), tmax=float(tmax), points_per_decade=int(ppd)
        )
    except ValueError:
        raise click.BadParameter("grid must look like tmin:tmax:points_per_decade")


def _parse_list(value: str, cast):
    return [cast(x) for x in value.replace(",", " ").split()]


# config-file key -> (override name, conversion from the raw INI string)
_CONFIG_KEYS = {
    "preset": ("preset", str),
    "l": ("L", int),
    "l_list": ("L_list", lambda raw: _parse_list(raw, int)),
    "d": ("D", float),
    "d_list": ("D_list", lambda raw: _parse_list(raw, float)),
    "g": ("g", float),
    "g_list": ("g_list", lambda raw: _parse_list(raw, float)),
    "j": ("J", float),
    "h": ("h", float),
    "h_list": ("h_list", lambda raw: _parse_list(raw, float)),
    "boundary": ("boundary", str),
    "samples": ("samples", int),
    "seed": ("seed", int),
    "n_draws": ("n_draws", int),
    "dim_cap": ("dim_cap", int),
    "workers": ("workers", int),
    "grid": ("grid", str),
    "observables": ("observables", lambda raw: [x.strip() for x in raw.split(",")]),
}


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise click.BadParameter(f"config file {path} not found")
    if "experiment" not in parser:
        raise click.BadParameter("config file needs an [experiment] section")
    out: dict = {}
    for key, raw in parser["experiment"].items():
        if key not in _CONFIG_KEYS:
            raise click.BadParameter(f"unknown config key {key!r}")
        name, convert = _CONFIG_KEYS[key]
        out[name] = convert(raw.strip())
    return out


@click.group()
@click.version_option(__version__)
def main():
    """Exact diagonalization of the disordered spin ladder / dual chain."""


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host: str, port: int):
    """Start the HTTP service."""
    import uvicorn

    uvicorn.run("spinladder.service.app:app", host=host, port=port)


@main.command()
def presets():
    """List available experiment presets."""
    for info in ServiceClient().presets():
        click.echo(f"{info.name:14s} {info.kind}")


@main.command()
@click.option("--preset", default=None, help="Preset name; see `spinladder presets`.")
@click.option("--config", "config_file", type=click.Path(), default=None,
              help="INI file with an [experiment] section; flags override it.")
@click.option("--L", "L", type=int, default=None, help="Single system size.")
@click.option("--L-list", "L_list", default=None, help="Comma-separated sizes.")
@click.option("--D", "D", type=float, default=None, help="Single disorder strength.")
@click.option("--D-list", "D_list", default=None, help="Comma-separated strengths.")
@click.option("--g", type=float, default=None)
@click.option("--J", "J", type=float, default=None)
@click.option("--h", type=float, default=None, help="Constant field / hopping.")
@click.option("--h-list", "h_list", default=None)
@click.option("--boundary", type=click.Choice(["open", "periodic"]), default=None)
@click.option("--samples", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--workers", type=int, default=None,
              help="Worker processes; defaults to $SPINLADDER_WORKERS or the CPU count.")
@click.option("--grid", default=None, help="tmin:tmax:points_per_decade")
@click.option("--dim-cap", "dim_cap", type=int, default=None)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--url", default=None,
              help="Run against this service URL instead of in process.")
def run(config_file, out_dir, url, **flags):
    """Run a preset experiment and write CSV tables plus manifest.json.

    Level-statistics presets emit (D, L, n_samples, mean_r, stderr_r,
    dropped_fraction) plus a gap-ratio histogram; dynamics presets emit one
    CSV per observable with (t, <label>_mean, <label>_stderr, ...) columns;
    the three-level-model presets emit per-site occupations and
    (t, site, m_jj, valid) potential tables.
    """
    merged = _load_config_file(config_file)
    pairs = {"L": "L_list", "D": "D_list", "g": "g_list", "h": "h_list"}
    pairs.update({v: k for k, v in pairs.items()})
    flag_values = {k: v for k, v in flags.items() if v is not None}
    for key, value in flag_values.items():
        merged[key] = value
        # a flag displaces the config file's paired scalar/list variant
        partner = pairs.get(key)
        if partner and partner not in flag_values:
            merged.pop(partner, None)
    preset_name = merged.pop("preset", None)
    if preset_name is None:
        raise click.UsageError("a preset is required (flag --preset or config file)")
    workers = merged.pop("workers", None)
    if isinstance(merged.get("grid"), str):
        merged["grid"] = _parse_grid(merged["grid"])
    if isinstance(merged.get("L_list"), str):
        merged["L_list"] = _parse_list(merged["L_list"], int)
    for key in ("D_list", "h_list", "g_list"):
        if isinstance(merged.get(key), str):
            merged[key] = _parse_list(merged[key], float)
    try:
        request = schemas.ExperimentRequest(
            preset=preset_name,
            overrides=schemas.ExperimentOverrides(**merged),
            workers=workers,
        )
        response = ServiceClient(url).run_experiment(request)
    except SpinLadderError as exc:
        raise click.ClickException(str(exc))
    tables = [SeriesTable.from_payload(t.model_dump()) for t in response.tables]
    paths = write_outputs(tables, response.manifest, out_dir)
    for p in paths:
        click.echo(f"wrote {p}")


@main.command()
@click.option("--L", "L", type=int, default=6, show_default=True)
@click.option("--J", "J", type=float, default=1.0, show_default=True)
@click.option("--g", type=float, default=1.0, show_default=True)
@click.option("--D", "D", type=float, default=1.0, show_default=True)
@click.option("--draws", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=20240, show_default=True)
@click.option("--out", "out_file", type=click.Path(), default=None,
              help="Write the JSON report here instead of stdout.")
@click.option("--url", default=None)
def duality(L, J, g, D, draws, seed, out_file, url):
    """Verify the ladder/chain spectral equivalence; emits a JSON report."""
    request = schemas.DualityRequest(L=L, J=J, g=g, D=D, n_draws=draws, seed=seed)
    try:
        response = ServiceClient(url).duality(request)
    except SpinLadderError as exc:
        raise click.ClickException(str(exc))
    text = json.dumps(response.model_dump(), indent=2, sort_keys=True)
    if out_file:
        Path(out_file).write_text(text + "\n")
        click.echo(f"wrote {out_file}")
    else:
        click.echo(text)
    if response.worst_mismatch > 1e-10:
        sys.exit(1)


@main.command("gap-ratio")
@click.option("--L", "L", type=int, required=True)
@click.option("--D", "D", type=float, required=True)
@click.option("--J", "J", type=float, default=1.0, show_default=True)
@click.option("--g", type=float, default=1.0, show_default=True)
@click.option("--boundary", type=click.Choice(["open", "periodic"]),
              default="periodic", show_default=True)
@click.option("--samples", type=int, default=50, show_default=True)
@click.option("--seed", type=int, default=20240, show_default=True)
@click.option("--workers", type=int, default=None)
@click.option("--url", default=None)
def gap_ratio(L, D, J, g, boundary, samples, seed, workers, url):
    """Disorder-averaged adjacent-gap ratio for one (L, D) point."""
    request = schemas.GapRatioRequest(
        L=L, D=D, J=J, g=g, boundary=boundary, samples=samples, seed=seed,
        workers=workers,
    )
    try:
        response = ServiceClient(url).gap_ratio(request)
    except SpinLadderError as exc:
        raise click.ClickException(str(exc))
    click.echo(json.dumps(response.model_dump(), indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
