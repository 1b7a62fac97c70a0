"""Six-task Chinese NLP pipeline with a shared trainable encoder.

Typical use::

    from hanpipe import Pipeline
    nlp = Pipeline.load("runs/toy/student")
    result = nlp("他叫汤姆去拿外衣。")
"""

__version__ = "0.1.0"

from .data import AnnotatedSentence, SrlFrame
from .pipeline import Pipeline, PipelineModel

__all__ = ["AnnotatedSentence", "Pipeline", "PipelineModel", "SrlFrame", "__version__"]
