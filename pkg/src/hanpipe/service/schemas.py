"""Request/response models for the annotation service."""

from __future__ import annotations

from pydantic import BaseModel, Field

from ..data import AnnotatedSentence, sentence_to_dict


class AnnotateRequest(BaseModel):
    sentences: list[str] = Field(..., description="One raw sentence per entry")


class WordSpan(BaseModel):
    start: int
    end: int
    text: str


class Entity(BaseModel):
    start: int
    end: int
    type: str
    text: str


class Arc(BaseModel):
    dependent: int      # word index, 1-based
    head: int           # 0 = virtual root
    relation: str


class Edge(BaseModel):
    head: int
    dependent: int
    relation: str


class Argument(BaseModel):
    start: int          # word index span, half-open
    end: int
    role: str


class Frame(BaseModel):
    predicate: int      # word index, 0-based
    arguments: list[Argument]


class SentenceAnnotation(BaseModel):
    text: str
    words: list[WordSpan] | None = None
    pos: list[str] | None = None
    entities: list[Entity] | None = None
    dependencies: list[Arc] | None = None
    graph: list[Edge] | None = None
    frames: list[Frame] | None = None

    @classmethod
    def from_sentence(cls, sent: AnnotatedSentence) -> "SentenceAnnotation":
        out = cls(text=sent.text)
        if sent.words is not None:
            out.words = [WordSpan(start=s, end=e, text=sent.text[s:e]) for s, e in sent.words]
        if sent.pos is not None:
            out.pos = list(sent.pos)
        if sent.entities is not None:
            out.entities = [Entity(start=s, end=e, type=t, text=sent.text[s:e])
                            for s, e, t in sent.entities]
        if sent.heads is not None:
            out.dependencies = [Arc(dependent=i, head=h, relation=r)
                                for i, (h, r) in enumerate(zip(sent.heads, sent.rels), start=1)]
        if sent.sdp is not None:
            out.graph = [Edge(head=h, dependent=d, relation=r) for h, d, r in sent.sdp]
        if sent.srl is not None:
            out.frames = [Frame(predicate=f.predicate,
                                arguments=[Argument(start=s, end=e, role=r)
                                           for s, e, r in f.arguments])
                          for f in sent.srl]
        return out


class AnnotateResponse(BaseModel):
    sentences: list[SentenceAnnotation]


class HealthResponse(BaseModel):
    status: str
    version: str


class ModelInfoResponse(BaseModel):
    version: str
    tasks: list[str]
    encoder_width: int
    encoder_layers: int
    max_sentence_length: int
    vocab_size: int
    labels: dict[str, list[str]]
