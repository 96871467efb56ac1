"""In-out safety checking and minimal failure explanations for dup-free NetKAT."""

from .errors import (
    DomainTooLarge,
    EmptyGraph,
    GraphMLParseError,
    MalformedTopology,
    MissingSection,
    PolicySyntaxError,
    SafeCheckError,
    UndeclaredField,
    UnsupportedConstruct,
    ValueOutOfDomain,
)
from .explain import Explanation, Verdict, explain, is_minimal, minimize, subsumes
from .oracle import Packet, eval, eval_star, is_empty_program
from .parser import SafetyProblem, format_problem, parse_policy, parse_predicate, parse_problem
from .rewrite import FieldOrder, eliminate_negation, normalize, reduce_path, to_union_free_sum
from .terms import DomainMap, policy_size, pretty, structural_eq
from .topology import (
    TopologyGraph,
    encode_problem,
    encode_topology,
    gen_shortest_path_policy,
    load_graphml,
    longest_path_endpoints,
)
from .unfold import build_program, default_unfold_bound, unfold

__version__ = "0.1.0"
