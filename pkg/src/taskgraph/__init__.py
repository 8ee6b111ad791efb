"""Task graph learning from key-step sequences by maximum likelihood."""
__version__ = "0.1.0"

from .detection import (DetectionMetrics, MistakeVerdict, PerturbationConfig, check_step,
                        detection_metrics, perturb, replay, replay_perturbed)
from .estimator import TaskGraphLearner
from .exceptions import (CapacityError, ContractViolation, DatasetError, DegenerateStateError,
                         InvalidInputError, StructuralError, TaskGraphError, TrainingError,
                         TruncationWarning, UnsupportedOperation)
from .likelihood import (feasibility, masked_softmax, next_step_prob, sequence_log_likelihood,
                         tgml_gradient, tgml_loss, unweighted_next_prob)
from .metrics import EdgeMetrics, edge_prf
from .postprocess import (BinaryTaskGraph, binarize, break_cycles, export_graph, postprocess,
                          transitive_reduce, wire_orphans)
from .reasoner import (OptionalityBreakdown, ReasonerQuery, binary_scores, future_keystep_prob,
                       missing_keystep_score, optionality, previous_keystep_score,
                       procedural_mistake_score)
from .synth import GroundTruthDAG, count_linear_extensions, random_dag, sample_topological_sorts
from .training import TrainConfig, TrainedModel, default_beta, sequence_accuracy, train_do
from .vocab import (KeyStepSequence, KeyStepVocabulary, RawSequence, SequenceSet,
                    canonicalize_keep_first, expand_nonrepetitive, load_dataset)
