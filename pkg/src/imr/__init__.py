"""Rule-guided inductive process discovery."""

__version__ = "0.1.0"

from .log import EventLog, load_csv, load_xes, load_log, project  # noqa: E402
from .dfg import Dfg, extract_dfg  # noqa: E402
from .tree import (ProcessTree, Operator, accepts, bounded_language, parse_tree,  # noqa: E402
                   render_tree)
from .petri import PetriNet, to_petri_net, to_pnml  # noqa: E402
from .declare import DeclareRule, RuleSet, Template, check_trace, confidence, mine_rules, rule  # noqa: E402
from .cuts import Cut, ScoredCut, apply_rules, cost, explore, reject, select  # noqa: E402
from .discovery import ImrConfig, DiscoveryReport, StrictModeError, discover, guarantee_report  # noqa: E402
from .conformance import fitness, rule_conformance  # noqa: E402
