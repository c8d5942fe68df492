import random

from hypothesis import given, strategies as st

from chanfind.text import content_tokens, expand_tokens, lexical_score, token_list, tokens

from oracles import ref_score, ref_tokens


def test_case_transitions_split_camel_names():
    assert tokens("TerminalVoltageSetPoint") == {"terminal", "voltage", "set", "point"}


def test_identical_text_scores_one():
    assert lexical_score("x", "x") == 1.0


def test_empty_query_scores_zero():
    assert lexical_score("", "anything at all") == 0.0
    assert lexical_score("  ,;", "anything") == 0.0


def test_digits_and_acronyms_are_separate_tokens():
    assert token_list("OTRC.55.I1") == ["otrc", "55", "i", "1"]
    assert token_list("BPMAdata") == ["bpm", "adata"]
    assert token_list("SR01C___QF1___AC00") == ["sr", "01", "c", "qf", "1", "ac", "00"]


_ALPHABET = "abcXYZ019 _-.:/QwErTy"


def _random_text(rng: random.Random) -> str:
    words = ["Terminal", "voltage", "SetPoint", "BPM", "x", "GAUGE04", "ionPump", "RB", "sp", "HTTPServer"]
    parts = []
    for _ in range(rng.randint(0, 6)):
        if rng.random() < 0.6:
            parts.append(rng.choice(words))
        else:
            parts.append("".join(rng.choice(_ALPHABET) for _ in range(rng.randint(1, 8))))
    return rng.choice([" ", "_", ".", ""]).join(parts)


def test_hundred_seeded_pairs_match_reference_scorer():
    rng = random.Random(2024)
    for _ in range(100):
        q, c = _random_text(rng), _random_text(rng)
        assert token_list(q) == ref_tokens(q), q
        assert lexical_score(q, c) == ref_score(q, c), (q, c)


@given(st.text(max_size=40))
def test_tokenizer_agrees_with_character_scanner(text):
    assert token_list(text) == ref_tokens(text)


@given(st.text(max_size=30), st.text(max_size=30))
def test_score_is_a_fraction_and_repeatable(q, c):
    s = lexical_score(q, c)
    assert 0.0 <= s <= 1.0
    assert s == lexical_score(q, c)


def test_stopwords_dropped_from_content_tokens():
    assert content_tokens("show me the pressure of the gauge") == ["pressure", "gauge"]


def test_glossary_expands_terms_into_their_words():
    assert expand_tokens(["rb", "x"], {"rb": "read back"}) == {"read", "back", "x"}
    assert expand_tokens(["rb"], None) == {"rb"}
