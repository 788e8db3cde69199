from transformers import HfArgumentParser
from typing import List, Optional
from dataclasses import dataclass, field


DEFAULTS = {
    "seed": 0,
    "threads": 0,
    "format": "json",
    "log_level": "info",
    "twist_mode": "hausdorff",
    "perturb_budget": "1/64",
    "n_schedule": [100, 300, 1000],
    "grid": 64,
    "orbit_points": 64,
    "axis_n": 2,
    "bgit_threshold": 0,
    "triangle_n": 1000,
    "triangle_grid": 64,
    "triangle_tolerance": 0.05,
    "schottky_k": 1,
    "schottky_m": [5, 10, 20],
    "schottky_n": 200,
    "schottky_grid": 32,
    "schottky_eps": 0.1,
}


@dataclass
class CommonArguments:
    r"""
    Options shared by every command.
    """
    seed: Optional[int] = field(
        default=None,
        metadata={"help": "Random seed; falls back to $TORUSLAB_SEED, then 0."},
    )
    threads: Optional[int] = field(
        default=DEFAULTS["threads"],
        metadata={"help": "Torch threads for grid evaluation; 0 uses every core."},
    )
    format: Optional[str] = field(
        default=DEFAULTS["format"],
        metadata={"help": "Output format, json or svg; --svg PATH is short for --format svg --out PATH."},
    )
    out: Optional[str] = field(
        default=None,
        metadata={"help": "Output path for svg files and curve lists."},
    )
    log_level: Optional[str] = field(
        default=DEFAULTS["log_level"],
    )
    quiet: Optional[bool] = field(
        default=False,
        metadata={"help": "Disable progress bars."},
    )
    explain_defaults: Optional[bool] = field(
        default=False,
        metadata={"help": "Print the numeric defaults as JSON and exit."},
    )


@dataclass
class CurveArguments:
    r"""
    Commands taking curve files as positional inputs: curve-validate, intersect, d0, wedge, quasipath.
    """
    shift: Optional[int] = field(
        default=0,
        metadata={"help": "wedge only: use T^shift of the second lift."},
    )


@dataclass
class AnnulusArguments:
    r"""
    project, width and twist.
    """
    annulus: str = field(
        default=None,
        metadata={"help": "Curve file of the annulus core."},
    )
    mode: Optional[str] = field(
        default=DEFAULTS["twist_mode"],
        metadata={"help": "Twist variant: hausdorff, diameter or pointwise."},
    )
    markings: Optional[bool] = field(
        default=False,
        metadata={"help": "twist only: the inputs are marking files."},
    )
    relative: Optional[bool] = field(
        default=False,
        metadata={"help": "width only: relative width in the plane instead of the annulus."},
    )


@dataclass
class MarkingArguments:
    r"""
    dw.
    """
    check_bound: Optional[bool] = field(
        default=False,
        metadata={"help": "Compare against the diameter of the image of the unit square."},
    )
    map: Optional[str] = field(
        default=None,
        metadata={"help": "Map used for the diameter bound."},
    )


@dataclass
class FareyArguments:
    bfs_check: Optional[bool] = field(
        default=False,
        metadata={"help": "Also run the breadth-first oracle."},
    )


@dataclass
class SurgeryArguments:
    r"""
    bicorns and perturb.
    """
    path: Optional[bool] = field(
        default=False,
        metadata={"help": "bicorns only: emit a bicorn path instead of all bicorns."},
    )
    budget: Optional[str] = field(
        default=DEFAULTS["perturb_budget"],
        metadata={"help": "perturb only: sup-distance budget, a rational."},
    )


@dataclass
class EvalArguments:
    point: str = field(
        default="0,0",
        metadata={"help": "Point as 'x,y' with rational coordinates."},
    )
    iterations: Optional[int] = field(
        default=1,
    )
    numeric: Optional[bool] = field(
        default=False,
        metadata={"help": "Evaluate in float64 even for exact words."},
    )


@dataclass
class RotsetArguments:
    n_schedule: List[int] = field(
        default_factory=lambda: list(DEFAULTS["n_schedule"]),
        metadata={"help": "Iterate counts, estimated in turn; --n is accepted as well."},
    )
    grid: Optional[int] = field(
        default=DEFAULTS["grid"],
    )
    estimate_mode: Optional[str] = field(
        default="upper_sample",
        metadata={"help": "upper_sample or orbit_lower."},
    )
    orbit_points: Optional[int] = field(
        default=DEFAULTS["orbit_points"],
    )
    reference: Optional[str] = field(
        default=None,
        metadata={"help": "Reference polygon as 'x,y;x,y;...' for the svg overlay and the gap."},
    )


@dataclass
class AxisArguments:
    p: int = field(
        default=3,
    )
    q: int = field(
        default=3,
    )
    n: Optional[int] = field(
        default=DEFAULTS["axis_n"],
    )
    bgit_threshold: Optional[int] = field(
        default=DEFAULTS["bgit_threshold"],
        metadata={"help": "Opaque threshold B of the conditional conclusion."},
    )


@dataclass
class TriangleArguments:
    n: Optional[int] = field(
        default=DEFAULTS["triangle_n"],
    )
    grid: Optional[int] = field(
        default=DEFAULTS["triangle_grid"],
    )
    tolerance: Optional[float] = field(
        default=DEFAULTS["triangle_tolerance"],
    )


@dataclass
class SchottkyArguments:
    k: Optional[int] = field(
        default=DEFAULTS["schottky_k"],
    )
    m_schedule: List[int] = field(
        default_factory=lambda: list(DEFAULTS["schottky_m"]),
    )
    n: Optional[int] = field(
        default=DEFAULTS["schottky_n"],
    )
    grid: Optional[int] = field(
        default=DEFAULTS["schottky_grid"],
    )
    eps: Optional[float] = field(
        default=DEFAULTS["schottky_eps"],
    )


@dataclass
class SuiteArguments:
    filter: Optional[str] = field(
        default=None,
        metadata={"help": "Only run checks whose name matches this pattern."},
    )
    fast: Optional[bool] = field(
        default=False,
        metadata={"help": "Smaller iterate counts, for smoke runs."},
    )


COMMANDS = {
    "curve-validate": CurveArguments,
    "intersect": CurveArguments,
    "project": AnnulusArguments,
    "width": AnnulusArguments,
    "twist": AnnulusArguments,
    "d0": CurveArguments,
    "dw": MarkingArguments,
    "farey": FareyArguments,
    "wedge": CurveArguments,
    "quasipath": CurveArguments,
    "bicorns": SurgeryArguments,
    "perturb": SurgeryArguments,
    "eval": EvalArguments,
    "rotset": RotsetArguments,
    "axis-cert": AxisArguments,
    "triangle-check": TriangleArguments,
    "schottky": SchottkyArguments,
    "verify-suite": SuiteArguments,
}


# short spellings, expanded before parsing
ALIASES = {
    "*": {"--svg": ["--format", "svg", "--out"]},
    "rotset": {"--n": ["--n_schedule"]},
}


def expand_aliases(command: str, argv: List[str]) -> List[str]:
    table = {**ALIASES["*"], **ALIASES.get(command, {})}
    expanded = []
    for token in argv:
        flag, eq, value = token.partition("=")
        if flag in table:
            expanded += table[flag] + ([value] if eq else [])
        else:
            expanded.append(token)
    return expanded


def get_command_args(command: str, argv: List[str]):
    r"""
    Parses the flags of one command.
    Returns the common arguments, the command arguments and the positional inputs.
    """
    parser = HfArgumentParser((
        CommonArguments,
        COMMANDS[command],
    ))
    common_args, command_args, positional = parser.parse_args_into_dataclasses(
        args=expand_aliases(command, argv), return_remaining_strings=True
    )
    return common_args, command_args, positional
