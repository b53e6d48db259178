import math
import random

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from sentindex.classifier import (
    Classification,
    DictRuleConfig,
    classify_dict,
    classify_nb,
    emotion_delta,
    match_phrases,
    nb_scores,
)
from sentindex.lexicon import NbModel, SentimentLexicon, load_lexicon, sample_lexicon_path
from sentindex.textproc import TokenMultiset

import oracles
from synth import random_lemmas, random_lexicon, random_vocab

SAMPLE_LEX = load_lexicon(sample_lexicon_path())


def tm(*lemmas):
    return TokenMultiset(tuple(lemmas))


def twenty_tokens():
    return tm("хороший", "добрый", "плохой", *["день"] * 17)


class TestEmotionDelta:
    def test_hand_arithmetic(self):
        delta, pos, neg = emotion_delta(tm("хороший", "хороший", "плохой"), SAMPLE_LEX)
        assert (pos, neg) == (2, 1)
        assert delta == 1 / 3

    def test_no_hits(self):
        assert emotion_delta(tm("стол", "день", "кот"), SAMPLE_LEX) == (0.0, 0, 0)

    def test_empty(self):
        assert emotion_delta(tm(), SAMPLE_LEX) == (0.0, 0, 0)

    def test_plain_list_accepted(self):
        assert emotion_delta(["добрый"], SAMPLE_LEX) == (1.0, 1, 0)


class TestClassifyDict:
    def test_boundary_is_polar(self):
        c = classify_dict(twenty_tokens(), SAMPLE_LEX, DictRuleConfig(0.05))
        assert c.delta == 0.05
        assert c.label == 1
        assert (c.pos_hits, c.neg_hits, c.n) == (2, 1, 20)

    def test_just_above_boundary_is_neutral(self):
        assert classify_dict(twenty_tokens(), SAMPLE_LEX, DictRuleConfig(0.051)).label == 0

    def test_three_tokens(self):
        c = classify_dict(tm("хороший", "хороший", "плохой"), SAMPLE_LEX, DictRuleConfig(0.05))
        assert c == Classification(1, 1 / 3, 2, 1, 3)

    def test_negative(self):
        assert classify_dict(tm("плохой", "день"), SAMPLE_LEX).label == -1

    @pytest.mark.parametrize("alpha", [0.0, 0.02, 0.05, 0.5, 1.0])
    def test_balanced_hits_neutral_for_every_alpha(self, alpha):
        c = classify_dict(tm("добрый", "страшный", "день"), SAMPLE_LEX, DictRuleConfig(alpha))
        assert c.delta == 0 and c.label == 0

    def test_empty_text_neutral(self):
        assert classify_dict(tm(), SAMPLE_LEX, DictRuleConfig(0.0)) == Classification(0, 0.0, 0, 0, 0)

    def test_alpha_zero_polar_on_any_hit(self):
        assert classify_dict(tm("добрый", *["x"] * 99), SAMPLE_LEX, DictRuleConfig(0.0)).label == 1

    @pytest.mark.parametrize("alpha", [-0.01, 1.01, math.nan])
    def test_alpha_range(self, alpha):
        with pytest.raises(ValueError):
            DictRuleConfig(alpha)

    def test_matches_oracle_on_random_triples(self):
        rng = random.Random(11)
        vocab = random_vocab(rng, 200)
        for _ in range(2000):
            lex = random_lexicon(rng, vocab, rng.randint(0, 40), rng.randint(0, 40))
            lemmas = random_lemmas(rng, vocab, rng.randint(0, 30))
            alpha = round(rng.uniform(0, 0.5), rng.choice([1, 2, 3]))
            c = classify_dict(tm(*lemmas), lex, DictRuleConfig(alpha))
            label, _, plus, minus = oracles.dict_rule(lemmas, lex.positive_terms, lex.negative_terms, alpha)
            assert (c.label, c.pos_hits, c.neg_hits) == (label, plus, minus)


vocab_words = st.sampled_from([f"w{i}" for i in range(25)])


@st.composite
def text_and_lexicon(draw):
    lemmas = draw(st.lists(vocab_words, max_size=40))
    pos = draw(st.sets(vocab_words, max_size=8))
    neg = draw(st.sets(vocab_words, max_size=8)) - pos
    return lemmas, SentimentLexicon(frozenset(pos), frozenset(neg))


class TestDictProperties:
    @given(text_and_lexicon())
    def test_invariants(self, case):
        lemmas, lex = case
        c = classify_dict(tm(*lemmas), lex)
        assert -1 <= c.delta <= 1
        assert c.pos_hits + c.neg_hits <= c.n == len(lemmas)
        assert c.label in (-1, 0, 1)
        if c.n:
            assert c.delta == (c.pos_hits - c.neg_hits) / c.n

    @given(text_and_lexicon(), st.floats(0, 1))
    def test_swap_antisymmetry(self, case, alpha):
        lemmas, lex = case
        cfg = DictRuleConfig(alpha)
        a = classify_dict(tm(*lemmas), lex, cfg)
        b = classify_dict(tm(*lemmas), lex.swapped(), cfg)
        assert b.delta == -a.delta
        assert b.label == -a.label

    @given(text_and_lexicon(), st.floats(0, 1), st.floats(0, 1))
    def test_neutral_monotone_in_alpha(self, case, a1, a2):
        lemmas, lex = case
        lo, hi = sorted((a1, a2))
        if classify_dict(tm(*lemmas), lex, DictRuleConfig(lo)).label == 0:
            assert classify_dict(tm(*lemmas), lex, DictRuleConfig(hi)).label == 0


def pair_model(floor=1e-7):
    return NbModel({("еле", "досматривать"): {-1: 0.000881168, 1: 0.000016001}}, floor=floor)


class TestClassifyNb:
    def test_worked_pair_is_negative(self):
        c = classify_nb(tm("еле", "досматривать"), pair_model())
        assert c.label == -1
        assert c.delta is None
        assert c.n == 2

    def test_no_match_uniform_priors_is_neutral(self):
        assert classify_nb(tm("хороший", "фильм"), pair_model()).label == 0

    def test_no_match_follows_priors(self):
        m = NbModel({("x",): {1: 0.5}}, priors={-1: 0.5, 0: 0.2, 1: 0.3})
        assert classify_nb(tm("y"), m).label == -1

    def test_tie_prefers_positive_over_negative(self):
        m = NbModel({("x",): {-1: 0.4, 0: 0.1, 1: 0.4}})
        assert classify_nb(tm("x"), m).label == 1

    def test_lexicon_hits_filled_when_given(self):
        c = classify_nb(tm("еле", "досматривать", "скучный"), pair_model(), SAMPLE_LEX)
        assert (c.label, c.pos_hits, c.neg_hits, c.n) == (-1, 0, 1, 3)

    def test_greedy_longest_match(self):
        m = NbModel({
            ("a",): {1: 0.1},
            ("a", "b"): {1: 0.2},
            ("a", "b", "c"): {1: 0.3},
            ("c",): {1: 0.4},
            ("a", "b", "c", "d"): {1: 0.5},
        })
        assert match_phrases(["a", "b", "c", "a", "b", "x", "c"], m) == [
            ("a", "b", "c"), ("a", "b"), ("c",),
        ]
        # 4-token phrases are beyond the matching window
        assert match_phrases(["a", "b", "c", "d"], m) == [("a", "b", "c")]

    def test_log_scores_match_direct_product(self):
        rng = random.Random(5)
        for _ in range(300):
            units = [tuple(f"t{j}_{k}" for k in range(rng.randint(1, 3))) for j in range(rng.randint(1, 5))]
            phrases = {}
            for u in units:
                phrases[u] = {c: rng.uniform(1e-4, 1) for c in rng.sample([-1, 0, 1], rng.randint(1, 3))}
            raw = [rng.uniform(0.05, 1) for _ in range(3)]
            priors = {c: v / sum(raw) for c, v in zip((-1, 0, 1), raw)}
            model = NbModel(phrases, priors=priors, floor=1e-5)
            seq = [rng.choice(units) for _ in range(rng.randint(0, 6))]
            lemmas = []
            for u in seq:
                lemmas += [*u, "filler"]
            scores = nb_scores(tm(*lemmas), model)
            direct = oracles.nb_direct_product(seq, phrases, priors, 1e-5)
            for c in (-1, 0, 1):
                assert math.isclose(scores[c], math.log(direct[c]), rel_tol=1e-9)
            best = max(direct, key=lambda c: (direct[c], {0: 2, 1: 1, -1: 0}[c]))
            assert classify_nb(tm(*lemmas), model).label == best

    @given(st.lists(st.sampled_from(["a", "b", "c", "d"]), max_size=20), st.floats(1e-6, 1))
    def test_all_equal_probabilities_give_neutral(self, lemmas, p):
        m = NbModel({(w,): {-1: p, 0: p, 1: p} for w in "abc"}, floor=p)
        assert classify_nb(tm(*lemmas), m).label == 0

    @settings(max_examples=200)
    @given(
        lemmas=st.lists(st.sampled_from(["a", "b", "c", "z"]), max_size=12),
        probs=st.lists(st.floats(1e-3, 1), min_size=9, max_size=9),
        scale=st.floats(1e-3, 1),
    )
    def test_argmax_invariant_under_common_scaling(self, lemmas, probs, scale):
        phrases = {(w,): dict(zip((-1, 0, 1), probs[3 * i:3 * i + 3])) for i, w in enumerate("abc")}
        base = NbModel(phrases)
        scores = sorted(nb_scores(tm(*lemmas), base).values())
        # near-ties could flip on rounding alone
        assume(scores[2] - scores[1] > 1e-9)
        scaled_phrases = {k: {c: p * scale for c, p in v.items()} for k, v in phrases.items()}
        # priors must stay a distribution, so scale their logs uniformly instead
        scaled = NbModel(scaled_phrases, floor=base.floor * scale)
        assert classify_nb(tm(*lemmas), scaled).label == classify_nb(tm(*lemmas), base).label
