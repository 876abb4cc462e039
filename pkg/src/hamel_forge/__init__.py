"""Finite-stage construction and verification of free families of Hamel bijections."""

from .engine import Config, ConstructionError, EngineState, Requirement, default_stream, run, run_stage
from .freewords import Word, concat, enumerate_words, inverse, reduce
from .partialmaps import DomainClash, InjectivityViolation, PartialFn, eval_word, word_graph
from .qspace import PairVec, SpanBasis, SymbolAllocator, Vec, is_plif
from .verify import Report, hamel_defect, run_checks

__version__ = "0.1.0"
