"""Sentence-level complexity features, eye-tracking reading metrics, and
regressors that predict reading cost from features or sentence embeddings.

The core package is pure computation over immutable inputs.  A FastAPI
service (``gazecomplex.service``) wraps it for multi-client use, and the
``gazecomplex`` CLI is a thin client over the same request/response models.
"""

__version__ = "0.1.0"
