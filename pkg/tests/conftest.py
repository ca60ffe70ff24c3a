import random

import pytest

from ieltsprep.corpus import EssayRecord, round_to_band, clamp_band
from ieltsprep.features import load_connectors, load_frequency_lexicon
from ieltsprep.grammar import BuiltinGrammarBackend

COMMON_SENTENCES = [
    "Many people believe that education is the key to a better life",
    "Governments should spend more money on public schools",
    "Children learn important skills when they play with friends",
    "Some students prefer to study at home in the evening",
    "Modern technology has changed the way people work and travel",
    "Families in big cities often have less time together",
    "Young people today face strong pressure to find good jobs",
    "Teachers play an important role in the lives of children",
    "Healthy food and exercise help people live longer lives",
    "The internet gives students easy access to information",
]

RARE_WORDS = [
    "ubiquitous", "paradigm", "nuanced", "pernicious", "exacerbate",
    "quintessential", "salient", "ephemeral", "meticulous", "holistic",
]

ERROR_SENTENCES = [
    "He go to school every day",
    "She want a better job",
    "It seem like a good idea",
    "They goes to the market",
    "The goverment must act now",
    "We must beleive in the the plan",
    "People need a good enviroment",
    "He think that money matter",
]

CONNECTOR_STARTS = ["However, ", "Furthermore, ", "Moreover, ", "In addition, ", "Therefore, "]


def make_synthetic_essay(quality: float, rng: random.Random) -> str:
    """Essay text whose measurable quality tracks `quality` in [0, 1]:
    higher quality means fewer planted grammar errors, more connectors,
    richer vocabulary, and adequate length."""
    n_sentences = 10 + int(10 * quality) + rng.randrange(3)
    n_errors = int(round((1.0 - quality) * 8))
    sentences = []
    for i in range(n_sentences):
        base = rng.choice(COMMON_SENTENCES)
        if rng.random() < quality * 0.6:
            base = rng.choice(CONNECTOR_STARTS) + base[0].lower() + base[1:]
        if rng.random() < quality * 0.5:
            base += " in a " + rng.choice(RARE_WORDS) + " way"
        sentences.append(base + ".")
    for _ in range(n_errors):
        sentences.insert(rng.randrange(len(sentences) + 1), rng.choice(ERROR_SENTENCES) + ".")
    n_paragraphs = 3 if quality > 0.3 else 1 + rng.randrange(2)
    per = max(1, len(sentences) // n_paragraphs)
    paragraphs = [
        " ".join(sentences[i : i + per]) for i in range(0, len(sentences), per)
    ]
    return "\n\n".join(p for p in paragraphs if p)


def make_synthetic_corpus(n: int, seed: int, id_prefix: str = "syn") -> list[EssayRecord]:
    rng = random.Random(seed)
    records = []
    for i in range(n):
        quality = rng.random()
        text = make_synthetic_essay(quality, rng)
        label = round_to_band(clamp_band(4.0 + 5.0 * quality + rng.gauss(0, 0.15)))
        records.append(
            EssayRecord(
                id=f"{id_prefix}-{i}",
                body=text,
                prompt="Education and society",
                label=label,
            )
        )
    return records


@pytest.fixture(scope="session")
def trained_model(lexicon, backend):
    """Small hybrid model trained on synthetic essays; shared across tests."""
    from ieltsprep.neural import EncoderConfig, TrainConfig, train

    records = make_synthetic_corpus(200, seed=21)
    enc = EncoderConfig(
        encoder_id="tiny", max_tokens=128, frozen_layer_count=1,
        hidden_dim=32, num_layers=2, num_heads=2, ff_dim=64,
    )
    cfg = TrainConfig(
        learning_rate=2e-3, weight_decay=0.01, dropout=0.1,
        target_jitter_sigma=0.02, grad_accum_steps=2, micro_batch=8,
        max_epochs=30, patience=6, seed=17,
    )
    artifact, _ = train(records[:170], records[170:], enc, cfg, lexicon, backend)
    return artifact


@pytest.fixture(scope="session")
def heldout_essays():
    return make_synthetic_corpus(30, seed=99, id_prefix="held")


@pytest.fixture(scope="session")
def lexicon():
    return load_frequency_lexicon()


@pytest.fixture(scope="session")
def backend():
    return BuiltinGrammarBackend()


@pytest.fixture(scope="session")
def connectors():
    return load_connectors()
