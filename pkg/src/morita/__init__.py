"""Morita equivalence of operator quantales on finite sup-lattices.

The pipeline: finite sup-lattices (lattice), their tensor products and
multimorphisms (tensor), quantales of sup-endomorphisms (quantale),
modules and bimodules over them (modules), the equivalence between
condition-checked pairing tables and full Morita contexts (engine), and
an exhaustive small-scale census plus text formats and a CLI
(census, io, cli).
"""

from .census import (CensusRecord, CensusTask, enumerate_multimorphisms,
                     enumerate_trimorphisms, run_census)
from .engine import (ImprimitivityBimodule, InvolutiveWitness, MoritaContext,
                     MoritaPairWitness, as_pair_witness,
                     build_context_from_pair, build_involutive_context,
                     check_imprimitivity, check_involutive_conditions,
                     check_involutive_conditions_full, check_morita_context,
                     check_pair_conditions, check_pair_conditions_full,
                     conditions_from_tables, derive_q_from_p,
                     extract_pair_from_context,
                     involutive_conditions_from_tables)
from .enumeration import (automorphisms, canonical_key, enumerate_lattices,
                          find_isomorphism)
from .errors import (ConditionReport, ConditionsFailed, ContextInvalid,
                     DomainMismatch, FormatError, MissingInvolution,
                     MissingJoin, MoritaError, NoBottom, NotAMultimorphism,
                     NotAPartialOrder, NotCompositionClosed, NotSupMap,
                     NotWellDefined, NoTop, ResourceLimit, ShapeMismatch,
                     StarNotWellDefined, Verdict)
from .lattice import (FiniteSupLattice, SupMap, as_sup_map, chain, diamond,
                      enumerate_sup_maps, is_sup_map, join_closure, m3, n5,
                      validate_lattice)
from .modules import (Bimodule, ModuleAction, check_bimodule, check_module,
                      conjugate_bimodule, essential_part, is_m_regular,
                      is_separated, regular_bimodule)
from .quantale import (InvolutiveQuantale, OperatorQuantale, Quantale,
                       as_involutive_quantale, as_quantale, check_quantale,
                       endo_quantale, image_subquantale,
                       is_quantale_involution)
from .tensor import (Multimorphism, MultiTensorLattice, as_multimorphism,
                     elem_tensor, is_multimorphism, lift_multimorphism,
                     multi_ideal_closure, restrict_to_elementaries,
                     tensor_product)

__version__ = "0.1.0"
