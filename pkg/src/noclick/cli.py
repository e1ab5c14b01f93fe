"""``noclick`` command-line entry point."""

from __future__ import annotations

import argparse
import logging
import sys

from .cache import POLICIES
from .config import COMMANDS, GAP_MODES, PRESETS, ConfigError, load_toml, resolve
from .dsff import RMT_CLASSES, THETA_PRESETS
from .hamiltonian import MODELS

log = logging.getLogger("noclick")


def _ints(text: str) -> list[int]:
    """``8,10,12`` or a range ``8:18:2`` (inclusive)."""
    text = text.strip()
    if ":" in text:
        parts = [int(p) for p in text.split(":")]
        if len(parts) not in (2, 3):
            raise argparse.ArgumentTypeError(f"bad range {text!r}")
        lo, hi = parts[0], parts[1]
        step = parts[2] if len(parts) == 3 else 1
        return list(range(lo, hi + 1, step))
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from None


def _floats(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="noclick", description="No-click monitored Ising chains: spectra, "
                                "entanglement, gaps and dissipative spectral form factors.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="TOML file with RunConfig fields (flags override it)")
    p.add_argument("--preset", choices=sorted(PRESETS))
    m = p.add_argument_group("model")
    m.add_argument("--model", choices=MODELS)
    m.add_argument("--L", type=int)
    m.add_argument("--h", type=float)
    m.add_argument("--gamma", type=float)
    m.add_argument("--J", type=float)
    m.add_argument("--J2", type=float)
    m.add_argument("--g", type=float)
    m.add_argument("--disorder", type=float, help="relative amplitude of site-field disorder")
    s = p.add_argument_group("selection and sweeps")
    s.add_argument("--sector", help="'full', 'all', or labels like 'k=0,z2=1,P=1' separated by ';'")
    s.add_argument("--L-list", dest="L_list", type=_ints, help="e.g. 8,10,12 or 8:18:2")
    s.add_argument("--grid-h", dest="grid_h", type=_floats)
    s.add_argument("--grid-gamma", dest="grid_gamma", type=_floats)
    s.add_argument("--gap-mode", dest="gap_mode", choices=GAP_MODES)
    s.add_argument("--L-A", dest="L_A", type=int, help="subsystem size (default floor(L/4))")
    d = p.add_argument_group("spectral form factor")
    d.add_argument("--realizations", type=int)
    d.add_argument("--theta-preset", dest="theta_preset", choices=sorted(THETA_PRESETS))
    d.add_argument("--connected", action=argparse.BooleanOptionalAction, default=None)
    d.add_argument("--resolve-z2", dest="resolve_z2", action=argparse.BooleanOptionalAction, default=None)
    d.add_argument("--n-tau", dest="n_tau", type=int)
    d.add_argument("--tau-min", dest="tau_min", type=float)
    d.add_argument("--tau-max", dest="tau_max", type=float)
    d.add_argument("--heisenberg-c", dest="heisenberg_c", type=float)
    d.add_argument("--rmt-class", dest="rmt_class", choices=RMT_CLASSES)
    d.add_argument("--N", type=int, help="baseline matrix size (default: matched to the model)")
    d.add_argument("--samples", type=int)
    o = p.add_argument_group("oracle")
    o.add_argument("--n-k", dest="n_k", type=int)
    r = p.add_argument_group("run")
    r.add_argument("--seed", type=int)
    r.add_argument("--out")
    r.add_argument("--jobs", type=int)
    r.add_argument("--cache", choices=POLICIES)
    r.add_argument("--cache-dir", dest="cache_dir")
    r.add_argument("-v", "--verbose", action="count", default=0)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {k: v for k, v in vars(args).items() if k not in ("config", "verbose") and v is not None}
    try:
        file_values = load_toml(args.config) if args.config else {}
        file_values.pop("command", None)
        cfg = resolve(file_values, overrides)
    except ConfigError as exc:
        parser.error(str(exc))
    from .runner import run

    try:
        return run(cfg)
    except ConfigError as exc:
        parser.error(str(exc))
    except MemoryError as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
