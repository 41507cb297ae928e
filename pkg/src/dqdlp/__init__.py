"""Simulator and orchestration harness for a distributed set-membership discrete-log algorithm."""

from .numt import DlpSolution, ProblemInstance, brute_force_dlp, verify
from .membership import SetDescriptor, membership_verdict, probe
from .search import SearchConfig, SearchTrace, solve

__all__ = [
    "DlpSolution",
    "ProblemInstance",
    "SearchConfig",
    "SearchTrace",
    "SetDescriptor",
    "brute_force_dlp",
    "membership_verdict",
    "probe",
    "solve",
    "verify",
]

__version__ = "0.1.0"
