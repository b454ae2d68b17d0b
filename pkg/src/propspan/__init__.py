"""Fine-grained propaganda-technique analysis toolkit.

Subpackages and modules:

* :mod:`propspan.model` - documents, sentences, techniques, fragments.
* :mod:`propspan.corpus` - corpus I/O, statistics, split verification.
* :mod:`propspan.metrics` - partial-overlap fragment scoring and binary
  sentence scoring.
* :mod:`propspan.nn` - the gated multi-granularity classifier with
  exact gradients, optimizer and training loop.
* :mod:`propspan.pipeline` - dataset preparation, fragment decoding and
  multi-seed experiments.
* :mod:`propspan.embeddings` - token embedding providers, including the
  binary embedding-file bridge format.
* :mod:`propspan.cli` - the ``propspan`` command-line tool.
"""

from .model import (
    NONE_CLASS,
    TECHNIQUES,
    TOKEN_CLASS_COUNT,
    AnnotationSet,
    Document,
    Fragment,
    SentenceSpan,
    Technique,
    UnknownTechniqueError,
    fragments_in_sentence,
    sentence_label,
)

__version__ = "0.1.0"

__all__ = [
    "NONE_CLASS",
    "TECHNIQUES",
    "TOKEN_CLASS_COUNT",
    "AnnotationSet",
    "Document",
    "Fragment",
    "SentenceSpan",
    "Technique",
    "UnknownTechniqueError",
    "fragments_in_sentence",
    "sentence_label",
    "__version__",
]
