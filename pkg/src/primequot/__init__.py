"""Verification toolkit for the prime quotient n -> floor(p_n / n):
class-membership checks, prime-size estimates, and explicit existential
formulas over {+, 1, F} with F(x) = x*f(x), including multiplication.
"""

from ._kernels import BACKEND
from .definability import (DefinedRelation, define_c_n_squared,
                           define_f_tilde, define_multiplication, emit,
                           lint_vocabulary, restricted_congruence,
                           witness_bracket)
from .errors import (DomainError, EvaluationError, ParseError,
                     PrimequotError, RangeExhaustedError,
                     SearchExhaustedError, UnboundedHintError)
from .formulas import (Evaluator, eval_formula, eval_term, parse,
                       parse_formula, parse_term, to_text)
from .oracles import (ClassParams, FunctionOracle, OverrideOracle,
                      PrimeQuotientOracle, SqrtLikeOracle, TableOracle,
                      class_check, inverse_sequence, make_sqrt_like,
                      make_table_oracle, pseudo_inverse)
from .primes import (PrimeTable, check_estimates, check_estimates_streaming,
                     iter_prime_segments, nth_prime, prime_quotient,
                     sieve_upto)
from .report import VerificationReport
from .verify import (output_truth_set, reverify_witness,
                     verify_defined_relation, verify_drop_bound,
                     verify_extraction_ingredients, verify_inverse_gap_lemma,
                     verify_inverse_gaps, verify_inverse_gaps_streaming,
                     verify_max_quotient, verify_window_variation)

__version__ = "0.1.0"
