"""Audit toolkit for self-explaining models.

Thin wrapper over the native module: MI estimators, relatedness scores,
applicability-domain verdicts, MC-dropout aggregation, surrogate fidelity,
and the combined audit.
"""

try:
    from . import _sxai as _native  # installed wheel layout
except ImportError:
    import _sxai as _native  # build-tree layout (module dir on sys.path)

DomainModel = _native.DomainModel
DomainVerdict = _native.DomainVerdict
SxaiError = _native.SxaiError
aggregate_classification = _native.aggregate_classification
aggregate_regression = _native.aggregate_regression
demo_run = _native.demo_run
entropy_discrete = _native.entropy_discrete
fidelity_gap = _native.fidelity_gap
gradient_check = _native.gradient_check
mi_correlation = _native.mi_correlation
mi_histogram = _native.mi_histogram
mi_kde = _native.mi_kde
mi_mixed = _native.mi_mixed
read_tensor = _native.read_tensor
relatedness = _native.relatedness
run_audit = _native.run_audit
train_surrogate = _native.train_surrogate
write_tensor = _native.write_tensor

__version__ = "0.1.0"

__all__ = [
    "DomainModel", "DomainVerdict", "SxaiError",
    "aggregate_classification", "aggregate_regression", "demo_run",
    "entropy_discrete", "fidelity_gap", "gradient_check", "mi_correlation",
    "mi_histogram", "mi_kde", "mi_mixed", "read_tensor", "relatedness",
    "run_audit", "train_surrogate", "write_tensor",
]
