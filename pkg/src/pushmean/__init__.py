"""Mean-payoff objectives on weighted pushdown systems and recursive game graphs."""

from .decide import Flavor, Lasso, Objective, Relation, Verdict, decide, extract_witness, has_good_cycle
from .model import POP, SKIP, Configuration, Edge, Path, Pop, Push, Skip, Wps, validate_wps
from .summary import NEG_INF, OMEGA, SummaryFn, bounded_summary, full_summary

__version__ = "0.1.0"

__all__ = [
    "Flavor", "Lasso", "Objective", "Relation", "Verdict", "decide", "extract_witness",
    "has_good_cycle", "POP", "SKIP", "Configuration", "Edge", "Path", "Pop", "Push", "Skip",
    "Wps", "validate_wps", "NEG_INF", "OMEGA", "SummaryFn", "bounded_summary", "full_summary",
]
