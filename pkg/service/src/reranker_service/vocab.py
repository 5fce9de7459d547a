"""Deterministic base WordPiece vocabulary.

The encoder is constructed locally, so the vocabulary is generated rather
than downloaded: special tokens, every printable ASCII character with its
continuation piece (which guarantees ASCII text never tokenizes to [UNK]),
and a compact word list so common text stays short. The marker tokens [S],
[D], [T] are never part of the base vocabulary; they are added as special
tokens afterwards (tokenizer.extend_vocabulary) so that they stay atomic.
"""

from __future__ import annotations

import string
from pathlib import Path

SPECIAL_TOKENS = ("[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]")

# Lowercase only: the tokenizer normalizer lowercases and strips accents
# before WordPiece runs, so uppercase rows would be unreachable.
_CHARS = tuple(
    sorted(set(string.ascii_lowercase + string.digits + string.punctuation))
)

_COMMON_WORDS = (
    "about", "after", "against", "agree", "all", "also", "amount", "and",
    "answer", "any", "are", "ask", "attorney", "back", "bank", "bankruptcy",
    "because", "been", "before", "being", "best", "business", "but", "buy",
    "can", "car", "case", "chapter", "charge", "child", "claim", "company",
    "contact", "contract", "could", "county", "court", "credit", "custody",
    "date", "debt", "did", "divorce", "document", "does", "down", "due",
    "employer", "estate", "even", "ever", "every", "fee", "file", "filed",
    "filing", "first", "for", "form", "from", "get", "give", "going", "good",
    "had", "has", "have", "hearing", "help", "her", "him", "his", "home",
    "house", "how", "husband", "income", "information", "insurance", "into",
    "judge", "just", "keep", "know", "landlord", "law", "lawyer", "legal",
    "letter", "license", "like", "loan", "made", "make", "may", "money",
    "month", "more", "mortgage", "most", "much", "must", "need", "new",
    "not", "notice", "now", "off", "office", "one", "only", "order", "other",
    "our", "out", "over", "owe", "own", "paid", "papers", "pay", "payment",
    "person", "phone", "plan", "police", "property", "protection", "put",
    "question", "receive", "record", "rent", "right", "said", "same", "say",
    "section", "see", "sell", "send", "she", "should", "sign", "since",
    "some", "state", "still", "sue", "take", "tax", "tell", "tenant", "than",
    "that", "the", "their", "them", "then", "there", "they", "this", "time",
    "title", "told", "took", "two", "under", "until", "use", "vehicle",
    "visit", "wage", "want", "was", "week", "were", "what", "when", "where",
    "which", "while", "who", "why", "wife", "will", "with", "without",
    "work", "would", "year", "years", "you", "your",
)

# Distinctive single-token category labels; toy corpora draw tags from this
# pool so the tag signal survives tokenization as one id per word.
_CATEGORY_WORDS = (
    "adoption", "alimony", "annulment", "appeal", "arbitration", "assault",
    "bail", "bailment", "codicil", "collateral", "conveyance", "covenant",
    "deed", "defamation", "easement", "eviction", "escrow", "foreclosure",
    "garnishment", "guardianship", "immigration", "indemnity", "injunction",
    "lien", "litigation", "malpractice", "mediation", "negligence",
    "notary", "nuisance", "parole", "patent", "probate", "probation",
    "repossession", "restitution", "severance", "subpoena", "surety",
    "tort", "trademark", "trespass", "trust", "visitation", "warranty",
    "zoning",
)


def base_vocabulary() -> list[str]:
    """Full base vocabulary, specials first, free of duplicates."""
    tokens: list[str] = list(SPECIAL_TOKENS)
    seen = set(tokens)
    for block in (
        _CHARS,
        tuple("##" + c for c in _CHARS),
        _COMMON_WORDS,
        _CATEGORY_WORDS,
    ):
        for token in block:
            if token not in seen:
                seen.add(token)
                tokens.append(token)
    return tokens


def category_words() -> tuple[str, ...]:
    return _CATEGORY_WORDS


def write_vocabulary(path: Path | str, tokens: list[str] | None = None) -> Path:
    """Write one token per line, the layout BertTokenizer reads."""
    path = Path(path)
    path.write_text("\n".join(tokens or base_vocabulary()) + "\n", encoding="utf-8")
    return path
