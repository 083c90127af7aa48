from .build import (
    DecodeError,
    EncodingInstance,
    EncodingSizeError,
    Example,
    ExampleSet,
    build_example_set,
    build_instance,
    decode_model,
    encode,
    encode_backward,
    encode_dfa_assignment,
    encode_forward,
    encode_naive,
    prefix_trie,
    relax_eta,
    suffix_trie,
    to_mip,
)
from .emit import to_cnf, to_dimacs, to_lp, to_smtlib

__all__ = [
    "DecodeError", "EncodingInstance", "EncodingSizeError", "Example", "ExampleSet",
    "build_example_set", "build_instance", "decode_model", "encode", "encode_backward",
    "encode_dfa_assignment", "encode_forward", "encode_naive", "prefix_trie", "relax_eta",
    "suffix_trie", "to_cnf", "to_dimacs", "to_lp", "to_mip", "to_smtlib",
]
