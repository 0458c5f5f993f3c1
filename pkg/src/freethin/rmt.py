"""Monte Carlo harness for quadratic forms of Gaussian data matrices.

For X of shape (n, m) with i.i.d. unit-variance entries and a diagonal B,
the two forms

    W1 = (1/n) X^T B X,    W2 = (1/n) X^T (I - B) X

are sampled repeatedly. Normalized traces (1/m) Tr of every word in (W1, W2)
up to a given length are averaged over trials, free cumulants are obtained
by Moebius inversion of the averaged table, and both are compared with the
free model in which X X^T / n is a free Poisson element of rate m/n.

Words are strings over {A, B} with A = W1 and B = W2.
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from .cumulants import free_cumulant
from .errors import PreconditionError, ResourceBoundError
from .free_models import FreeBernoulli, FreeFamilySpec, FreePoisson, Letter, SequenceMomentFamily, word_moment
from .nc_lattice import DEFAULT_CAP
from .scalars import parse_scalar

ENTRY_LAWS = ("gaussian", "rademacher")


def parse_spectrum(text: str) -> tuple:
    """``"0:0.35,0.5:0.3,1:0.35"`` -> ((0, 7/20), (1/2, 3/10), (1, 7/20)) as Fractions."""
    out = []
    for item in text.split(","):
        value, weight = item.split(":")
        out.append((parse_scalar(value.strip()), parse_scalar(weight.strip())))
    if sum(w for _, w in out) != 1:
        raise PreconditionError(f"spectrum weights sum to {sum(w for _, w in out)}, not 1")
    return tuple(out)


@dataclass(frozen=True)
class EnsembleConfig:
    n: int = 400
    m: int = 400
    p: float = 0.5
    trials: int = 200
    seed: int = 7
    entry_law: str = "gaussian"
    spectrum: tuple | None = None  # ((value, weight), ...) for a non-projection B
    memory_budget: int = 10_000_000
    workers: int = 1

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise PreconditionError("matrix dimensions must be positive")
        if self.trials < 1:
            raise PreconditionError("trials must be positive")
        if self.entry_law not in ENTRY_LAWS:
            raise PreconditionError(f"entry_law must be one of {ENTRY_LAWS}")
        if self.spectrum is None and not 0 <= self.p <= 1:
            raise PreconditionError("p must lie in [0, 1]")
        if self.n * self.m > self.memory_budget:
            raise ResourceBoundError(f"n*m = {self.n * self.m} exceeds the memory budget {self.memory_budget}")

    @property
    def c(self) -> Fraction:
        return Fraction(self.m, self.n)

    @property
    def rank(self) -> int:
        return int(round(self.p * self.n))

    def diagonal(self) -> np.ndarray:
        return np.array([float(v) for v in self.diagonal_exact()])

    def diagonal_exact(self) -> list:
        """Diagonal of B as exact values, largest values last."""
        if self.spectrum is None:
            r = self.rank
            return [Fraction(1)] * r + [Fraction(0)] * (self.n - r)
        counts = [int(round(float(w) * self.n)) for _, w in self.spectrum]
        counts[-1] = self.n - sum(counts[:-1])
        out = []
        for (v, _), k in zip(self.spectrum, counts):
            out += [Fraction(v)] * k
        return out

    def b_moments(self, order: int) -> tuple:
        """Exact moments (1/n) Tr B^k, k = 1..order."""
        d = self.diagonal_exact()
        return tuple(sum(x ** k for x in d) / self.n for k in range(1, order + 1))


def all_words(K: int) -> list:
    return ["".join(w) for L in range(1, K + 1) for w in product("AB", repeat=L)]


def _rng(cfg: EnsembleConfig, trial_index: int) -> np.random.Generator:
    # counter-based stream per (seed, trial): order independent
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([cfg.seed, trial_index])))


def sample_matrices(cfg: EnsembleConfig, trial_index: int):
    rng = _rng(cfg, trial_index)
    if cfg.entry_law == "gaussian":
        X = rng.standard_normal((cfg.n, cfg.m))
    else:
        X = rng.integers(0, 2, size=(cfg.n, cfg.m)) * 2.0 - 1.0
    b = cfg.diagonal()
    W1 = (X.T * b) @ X / cfg.n
    W2 = (X.T * (1 - b)) @ X / cfg.n
    return X, W1, W2


def word_traces(W1: np.ndarray, W2: np.ndarray, K: int) -> dict:
    """(1/m) Tr of every word of length <= K, via products of length <= ceil(K/2)."""
    m = W1.shape[0]
    mats = {"A": W1, "B": W2}
    half = (K + 1) // 2
    prods = {"A": W1, "B": W2}
    for L in range(2, half + 1):
        for w in product("AB", repeat=L):
            w = "".join(w)
            prods[w] = prods[w[:-1]] @ mats[w[-1]]
    out = {}
    for w in all_words(K):
        if len(w) == 1:
            out[w] = float(np.trace(mats[w])) / m
            continue
        h = (len(w) + 1) // 2
        U, V = prods[w[:h]], prods[w[h:]]
        out[w] = float(np.sum(U * V.T)) / m
    return out


def sample_trial(cfg: EnsembleConfig, trial_index: int, K: int) -> dict:
    """Word-trace table of one trial; deterministic in (seed, trial_index)."""
    _, W1, W2 = sample_matrices(cfg, trial_index)
    return word_traces(W1, W2, K)


def _word_pattern(w: str) -> tuple:
    return tuple(0 if ch == "A" else 1 for ch in w)


def _pattern_word(pat) -> str:
    return "".join("A" if i == 0 else "B" for i in pat)


def cumulant_table(moments: dict, K: int, cap: int = DEFAULT_CAP) -> dict:
    """Free cumulants of (W1, W2) for every word, from a word -> moment table."""

    def mf(args):
        return moments[_pattern_word(args)]

    return {w: free_cumulant(_word_pattern(w), mf, cap=cap) for w in all_words(K)}


def _model(cfg: EnsembleConfig, c: Fraction, order: int) -> FreeFamilySpec:
    q = FreePoisson(rate=c, jump=1, id="Q")
    if cfg.spectrum is None:
        b = FreeBernoulli(Fraction(cfg.rank, cfg.n), id="D")
    else:
        b = SequenceMomentFamily(cfg.b_moments(order), id="D")
    return FreeFamilySpec([q, b], cap=max(DEFAULT_CAP, 2 * order))


def predicted_moments(cfg: EnsembleConfig, K: int, c: Fraction | None = None) -> dict:
    """(1/c) phi(q d_1 q d_2 ...) per word, d = b for A and 1 - b for B (exact)."""
    c = cfg.c if c is None else Fraction(c)
    spec = _model(cfg, c, K)
    qa, da = Letter("Q"), Letter("D")
    letters = {"A": (qa, da), "B": (qa, da.complement())}
    out = {}
    for w in all_words(K):
        wd = tuple(x for ch in w for x in letters[ch])
        out[w] = word_moment(spec, wd) / c
    return out


@dataclass
class TrialReport:
    config: dict
    K: int
    words: list
    empirical: dict
    se: dict
    prediction: dict
    prediction_c1: dict
    gap: dict
    cumulants: dict
    cumulant_se: dict
    cumulant_prediction: dict
    cumulant_gap: dict
    seconds: float = 0.0
    per_trial_sd: dict = field(default_factory=dict)
    # cumulants in the ambient state E (1/n) Tr, where the moment table is c times the one above
    ambient_cumulants: dict = field(default_factory=dict)
    ambient_cumulant_se: dict = field(default_factory=dict)
    ambient_cumulant_prediction: dict = field(default_factory=dict)

    def ambient_kappa2_defect(self) -> tuple:
        """kappa_2(A) + kappa_2(B) - kappa_2(A + B) = -2 kappa_2(A, B) in the ambient state: (estimate, SE, prediction)."""
        return (
            -2 * self.ambient_cumulants["AB"],
            2 * self.ambient_cumulant_se["AB"],
            -2 * self.ambient_cumulant_prediction["AB"],
        )

    def mixed_words(self, max_len: int | None = None) -> list:
        L = self.K if max_len is None else max_len
        return [w for w in self.words if 2 <= len(w) <= L and len(set(w)) > 1]

    def max_mixed_z(self, max_len: int | None = None, against: str = "zero") -> float:
        """Largest |kappa_hat - target| / SE over mixed words (target 0 or the prediction)."""
        worst = 0.0
        for w in self.mixed_words(max_len):
            target = 0.0 if against == "zero" else float(self.cumulant_prediction[w])
            se = self.cumulant_se[w]
            z = abs(self.cumulants[w] - target) / se if se > 0 else (0.0 if self.cumulants[w] == target else float("inf"))
            worst = max(worst, z)
        return worst

    def to_dict(self) -> dict:
        def f(d):
            return {w: float(v) for w, v in d.items()}

        return {
            "config": self.config,
            "K": self.K,
            "words": self.words,
            "empirical": f(self.empirical),
            "se": f(self.se),
            "prediction": f(self.prediction),
            "prediction_c1": f(self.prediction_c1),
            "gap": f(self.gap),
            "cumulants": {
                "empirical": f(self.cumulants),
                "se": f(self.cumulant_se),
                "prediction": f(self.cumulant_prediction),
                "gap": f(self.cumulant_gap),
            },
            "ambient_cumulants": {
                "empirical": f(self.ambient_cumulants),
                "se": f(self.ambient_cumulant_se),
                "prediction": f(self.ambient_cumulant_prediction),
            },
            "per_trial_sd": f(self.per_trial_sd),
            "seconds": self.seconds,
        }


def _jackknife(samples: np.ndarray, statistic) -> tuple:
    """Full-sample statistic and jackknife SE over the trial axis (axis 0)."""
    T = samples.shape[0]
    total = samples.sum(axis=0)
    full = statistic(total / T)
    loo = [statistic((total - samples[t]) / (T - 1)) for t in range(T)]
    keys = full.keys()
    se = {}
    for k in keys:
        vals = np.array([d[k] for d in loo])
        se[k] = float(np.sqrt((T - 1) / T * np.sum((vals - vals.mean()) ** 2)))
    return full, se


def run_experiment(cfg: EnsembleConfig, K: int = 4, cap: int = DEFAULT_CAP) -> TrialReport:
    if K < 1 or 2 * K > cap:
        raise PreconditionError(f"K must lie in 1..{cap // 2} (words are doubled in the model)")
    if cfg.trials < 2:
        raise PreconditionError("at least two trials are needed for standard errors")
    start = time.perf_counter()
    words = all_words(K)
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            tables = list(pool.map(lambda t: sample_trial(cfg, t, K), range(cfg.trials)))
    else:
        tables = [sample_trial(cfg, t, K) for t in range(cfg.trials)]
    # fixed reduction order: rows are indexed by trial
    samples = np.array([[tab[w] for w in words] for tab in tables])

    def as_table(vec):
        return dict(zip(words, vec))

    emp, se = _jackknife(samples, as_table)
    kap, kse = _jackknife(samples, lambda vec: cumulant_table(as_table(vec), K, cap))
    pred = predicted_moments(cfg, K)
    pred1 = predicted_moments(cfg, K, c=1)
    kpred = cumulant_table(pred, K, cap)
    c = cfg.c
    akap, akse = _jackknife(samples, lambda vec: cumulant_table(as_table(float(c) * vec), K, cap))
    akpred = cumulant_table({w: c * v for w, v in pred.items()}, K, cap)
    sd = dict(zip(words, samples.std(axis=0, ddof=1)))
    return TrialReport(
        config=_config_dict(cfg),
        K=K,
        words=words,
        empirical=emp,
        se=se,
        prediction=pred,
        prediction_c1=pred1,
        gap={w: abs(emp[w] - float(pred[w])) for w in words},
        cumulants=kap,
        cumulant_se=kse,
        cumulant_prediction=kpred,
        cumulant_gap={w: abs(kap[w] - float(kpred[w])) for w in words},
        seconds=time.perf_counter() - start,
        per_trial_sd=sd,
        ambient_cumulants=akap,
        ambient_cumulant_se=akse,
        ambient_cumulant_prediction=akpred,
    )


def _config_dict(cfg: EnsembleConfig) -> dict:
    d = asdict(cfg)
    if cfg.spectrum is not None:
        d["spectrum"] = [[str(v), str(w)] for v, w in cfg.spectrum]
    return d


@dataclass
class SweepRow:
    spectrum: str
    n: int
    b_moments: tuple
    kappa2: float
    kappa2_se: float
    kappa2_prediction: float
    z_zero: float
    z_prediction: float
    w1_free_poisson_z: float  # worst |m_k(W1) - free Poisson(rate m1) moment| / SE


def _spectrum_label(cfg: EnsembleConfig) -> str:
    if cfg.spectrum is None:
        return f"projection p={cfg.p}"
    return ",".join(f"{v}:{w}" for v, w in cfg.spectrum)


def converse_sweep(base: EnsembleConfig, spectra: list, sizes: list, K: int = 3) -> list:
    """Mixed kappa_2 of (W1, W2) across B spectra and sizes (square case m = n)."""
    from .cumulants import cumulants_to_moments

    rows = []
    for spec in spectra:
        for n in sizes:
            cfg = EnsembleConfig(
                n=n, m=n, p=base.p, trials=base.trials, seed=base.seed, entry_law=base.entry_law,
                spectrum=spec, memory_budget=base.memory_budget, workers=base.workers,
            )
            rep = run_experiment(cfg, K)
            k2, s = rep.cumulants["AB"], rep.cumulant_se["AB"]
            kp = float(rep.cumulant_prediction["AB"])
            m1 = cfg.b_moments(1)[0]
            fp = cumulants_to_moments([m1] * K)
            wz = max(abs(rep.empirical["A" * k] - float(fp.at(k))) / rep.se["A" * k] for k in range(1, K + 1))
            rows.append(
                SweepRow(
                    spectrum=_spectrum_label(cfg),
                    n=n,
                    b_moments=tuple(str(x) for x in cfg.b_moments(2)),
                    kappa2=k2,
                    kappa2_se=s,
                    kappa2_prediction=kp,
                    z_zero=abs(k2) / s,
                    z_prediction=abs(k2 - kp) / s,
                    w1_free_poisson_z=wz,
                )
            )
    return rows


def scaling_identity_gap(cfg: EnsembleConfig, trial_index: int, K: int) -> float:
    """Compare (1/m) Tr words in W with (n/m) (1/n) Tr of B-interleaved words in S = X X^T / n."""
    X, W1, W2 = sample_matrices(cfg, trial_index)
    direct = word_traces(W1, W2, K)
    S = X @ X.T / cfg.n
    b = cfg.diagonal()
    factors = {"A": b[:, None] * S, "B": (1 - b)[:, None] * S}
    worst = 0.0
    for w in all_words(K):
        M = factors[w[0]]
        for ch in w[1:]:
            M = M @ factors[ch]
        other = (cfg.n / cfg.m) * float(np.trace(M)) / cfg.n
        worst = max(worst, abs(other - direct[w]) / max(1.0, abs(direct[w])))
    return worst
