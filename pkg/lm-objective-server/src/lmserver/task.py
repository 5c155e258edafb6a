"""Task templates: a mask-filling template, verbalizers, and a frozen
few-shot example set, with a word-level vocabulary built from the task file
itself so the server needs no external tokenizer assets."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

SPECIALS = ("[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]")
PAD, UNK, CLS, SEP, MASK = range(5)

_TOKEN_RE = re.compile(r"\[mask\]|[a-z0-9']+")


class TaskError(ValueError):
    """Invalid task configuration."""


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class Example:
    sentence: str
    label: str


@dataclass(frozen=True)
class TaskTemplate:
    """A mask-filling classification task over a closed word vocabulary."""

    name: str
    template: str
    prompt_length: int
    verbalizers: dict[str, str]  # label name -> verbalizer word
    examples: tuple[Example, ...]
    vocab: tuple[str, ...]

    def __post_init__(self):
        if "{sentence}" not in self.template:
            raise TaskError("template must contain a {sentence} placeholder")
        if tokenize(self.template).count("[mask]") != 1:
            raise TaskError("template must contain exactly one [MASK] position")
        if self.prompt_length < 1:
            raise TaskError("prompt_length must be positive")
        if len(set(self.verbalizers.values())) != len(self.verbalizers):
            raise TaskError("verbalizer words must be distinct")
        for label, word in self.verbalizers.items():
            if len(tokenize(word)) != 1:
                raise TaskError(f"verbalizer {word!r} for {label!r} is not a single token")
        for example in self.examples:
            if example.label not in self.verbalizers:
                raise TaskError(f"example label {example.label!r} has no verbalizer")

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    def token_id(self, token: str) -> int:
        try:
            return self.vocab.index(token)
        except ValueError:
            return UNK

    @property
    def verbalizer_ids(self) -> tuple[int, ...]:
        return tuple(self.token_id(word.lower()) for word in self.verbalizers.values())

    @property
    def labels(self) -> tuple[int, ...]:
        """Gold verbalizer token id per example."""
        return tuple(
            self.token_id(self.verbalizers[e.label].lower()) for e in self.examples
        )

    def encode(self, sentence: str) -> tuple[list[int], int]:
        """Token ids for one templated example and the mask position."""
        tokens = ["[CLS]"] + tokenize(self.template.format(sentence=sentence)) + ["[SEP]"]
        ids = [MASK if t == "[mask]" else self.token_id(t) for t in tokens]
        ids[0], ids[-1] = CLS, SEP
        return ids, ids.index(MASK)

    def encode_all(self) -> tuple[list[list[int]], list[int]]:
        encoded = [self.encode(e.sentence) for e in self.examples]
        return [ids for ids, _ in encoded], [pos for _, pos in encoded]


def _build_vocab(raw: dict) -> tuple[str, ...]:
    words: set[str] = set()
    for piece in raw["template"].split("{sentence}"):
        words.update(t for t in tokenize(piece) if t != "[mask]")
    for example in raw["examples"]:
        words.update(tokenize(example["sentence"]))
    words.update(w.lower() for w in raw["verbalizers"].values())
    return SPECIALS + tuple(sorted(words))


def load_task(path: str | Path) -> TaskTemplate:
    raw = json.loads(Path(path).read_text())
    try:
        return TaskTemplate(
            name=str(raw["name"]),
            template=str(raw["template"]),
            prompt_length=int(raw.get("prompt_length", 8)),
            verbalizers={str(k): str(v) for k, v in raw["verbalizers"].items()},
            examples=tuple(
                Example(str(e["sentence"]), str(e["label"])) for e in raw["examples"]
            ),
            vocab=_build_vocab(raw),
        )
    except KeyError as exc:
        raise TaskError(f"task file missing {exc}") from exc


def default_task_path() -> Path:
    return Path(resources.files("lmserver") / "tasks" / "sst2_16shot.json")
