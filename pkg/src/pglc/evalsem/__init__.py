"""Stage-indexed semantics: values, evaluation, restriction and normalisation."""
from .values import (STAR, Value, StarV, NumV, EnumV, PairV, InlV, InrV, StreamV, LaterV, DistV,
                     ClosV, ConstFnV, BoxV, prefix, stream_of, to_py, to_sexpr)
from .evaluator import (Evaluator, Env, EvalError, FuelExhausted, restrict, promote, evaluate,
                        dist_of, default_fuel, DEFAULT_FUEL)
from .normalize import (normalize, normalize_formula, equiv, term_eq, formula_eq, apply_hints,
                        fix_unfold, stream_eta, HintError)
