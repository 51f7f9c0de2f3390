"""Genetic search over fuzzy rules: one chromosome encodes one rule.

A chromosome is five genes in 1..7 (four antecedent MF indices plus the
consequent). The population as a whole decodes to a rule base and is scored
collectively by training MAPE, so selection has no per-chromosome credit:
tournament entrants win uniformly at random, and elitism re-injects
chromosomes from the best population seen so far.

Decoding prunes exact duplicates and resolves antecedent conflicts by keeping
the consequent whose single-rule inference scores the lowest MAPE on the
cases it fires on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Predictor
from .data import Dataset, FeatureVector
from .errors import EmptyTrainError
from .fuzzy import (
    DEFAULT_SAMPLES,
    FuzzyEngine,
    FuzzyRule,
    FuzzyVariable,
    InferenceResult,
    RuleBase,
    infer_detail,
    variables_from_dataset,
)
from .metrics import mape

GENE_COUNT = 5
GENE_MAX = 7
_TOURNAMENT_SIZE = 3


@dataclass(frozen=True)
class Chromosome:
    """Five genes in 1..7; decodes to one fuzzy rule."""

    genes: tuple[int, int, int, int, int]

    def __post_init__(self):
        if len(self.genes) != GENE_COUNT or any(
            not (1 <= g <= GENE_MAX) for g in self.genes
        ):
            raise ValueError(f"genes must be {GENE_COUNT} integers in 1..{GENE_MAX}")

    def decode(self) -> FuzzyRule:
        return FuzzyRule(self.genes[:4], self.genes[4])


@dataclass(frozen=True)
class GAConfig:
    population_size: int = 63
    generations: int = 200
    crossover_prob: float = 0.7
    mutation_prob: float = 0.01
    elitism_count: int = 2
    seed: int = 0
    samples: int = DEFAULT_SAMPLES

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        for name in ("crossover_prob", "mutation_prob"):
            p = getattr(self, name)
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"{name} must be in [0, 1], got {p}")
        if not (1 <= self.elitism_count < self.population_size):
            raise ValueError("elitism_count must be in [1, population_size)")


def random_chromosome(rng: np.random.Generator) -> Chromosome:
    return Chromosome(tuple(int(g) for g in rng.integers(1, GENE_MAX + 1, GENE_COUNT)))


def crossover(
    a: Chromosome, b: Chromosome, rng: np.random.Generator, prob: float = 0.7
) -> tuple[Chromosome, Chromosome]:
    """Single-point crossover at a uniform cut in 1..4, applied with ``prob``."""
    if rng.random() >= prob:
        return a, b
    cut = int(rng.integers(1, GENE_COUNT))
    return (
        Chromosome(a.genes[:cut] + b.genes[cut:]),
        Chromosome(b.genes[:cut] + a.genes[cut:]),
    )


def mutate(
    c: Chromosome, rng: np.random.Generator, prob: float = 0.01
) -> Chromosome:
    """Each gene independently redrawn uniformly from 1..7 with ``prob``."""
    genes = list(c.genes)
    for i in range(GENE_COUNT):
        if rng.random() < prob:
            genes[i] = int(rng.integers(1, GENE_MAX + 1))
    return Chromosome(tuple(genes))


class _PopulationEvaluator:
    """Precomputed training-side state for scoring whole populations."""

    def __init__(
        self,
        train: Dataset,
        variables: tuple[tuple[FuzzyVariable, ...], FuzzyVariable] | None,
        samples: int,
    ):
        if len(train) == 0:
            raise EmptyTrainError("genetic-fuzzy evaluation needs a nonempty training set")
        input_vars, output_var = variables or variables_from_dataset(train)
        self.input_vars = tuple(input_vars)
        self.output_var = output_var
        self.engine = FuzzyEngine(self.input_vars, output_var, samples)
        self.memberships = self.engine.input_memberships(train.features_matrix)
        self.targets = train.targets
        self.fallback = float(np.mean(train.targets))

    def decode_and_fitness(self, population: Sequence[Chromosome]) -> tuple[RuleBase, float]:
        # unique antecedent/consequent pairs in first-occurrence order
        pairs: list[tuple[tuple[int, ...], int]] = []
        seen: set[tuple[tuple[int, ...], int]] = set()
        for ch in population:
            pair = (ch.genes[:4], ch.genes[4])
            if pair not in seen:
                seen.add(pair)
                pairs.append(pair)
        antecedents = np.array([p[0] for p in pairs], dtype=int)
        strengths = self.engine.strengths(self.memberships, antecedents)

        groups: dict[tuple[int, ...], list[int]] = {}
        order: list[tuple[int, ...]] = []
        for idx, (ant, _) in enumerate(pairs):
            if ant not in groups:
                groups[ant] = []
                order.append(ant)
            groups[ant].append(idx)

        winners: list[int] = []
        for ant in order:
            candidates = groups[ant]
            if len(candidates) == 1:
                winners.append(candidates[0])
                continue
            col = strengths[:, candidates[0]]
            fired = col > 0.0
            best_idx, best_score = None, (math.inf, GENE_MAX + 1)
            for idx in candidates:
                cons = pairs[idx][1]
                if fired.any():
                    values, _ = self.engine.centroids(
                        col[fired][:, None], np.array([cons], dtype=int)
                    )
                    solo = mape(self.targets[fired], values)
                else:
                    solo = math.inf
                score = (solo, cons)
                if score < best_score:
                    best_idx, best_score = idx, score
            winners.append(best_idx)

        rules = tuple(FuzzyRule(pairs[i][0], pairs[i][1]) for i in winners)
        consequents = np.array([r.consequent for r in rules], dtype=int)
        values, ok = self.engine.centroids(strengths[:, winners], consequents)
        values = values.copy()
        values[~ok] = self.fallback
        fitness_pct = mape(self.targets, values)
        rule_base = RuleBase(rules, self.input_vars, self.output_var)
        return rule_base, fitness_pct


def decode_population(
    population: Sequence[Chromosome],
    train: Dataset,
    variables: tuple[tuple[FuzzyVariable, ...], FuzzyVariable] | None = None,
    samples: int = DEFAULT_SAMPLES,
) -> RuleBase:
    """Prune duplicates, resolve conflicts, and return the decoded rule base."""
    rule_base, _ = _PopulationEvaluator(train, variables, samples).decode_and_fitness(population)
    return rule_base


def fitness(
    population: Sequence[Chromosome],
    train: Dataset,
    variables: tuple[tuple[FuzzyVariable, ...], FuzzyVariable] | None = None,
    samples: int = DEFAULT_SAMPLES,
) -> float:
    """Training MAPE of the decoded rule base (fallback cases included)."""
    _, fit = _PopulationEvaluator(train, variables, samples).decode_and_fitness(population)
    return fit


def _tournament(
    population: Sequence[Chromosome], rng: np.random.Generator
) -> Chromosome:
    # Chromosomes carry no individual credit in the collectively-scored
    # population, so the tournament winner is a uniform pick of the entrants.
    entrants = rng.integers(0, len(population), _TOURNAMENT_SIZE)
    return population[int(entrants[int(rng.integers(0, _TOURNAMENT_SIZE))])]


def evolve(
    cfg: GAConfig,
    train: Dataset,
    variables: tuple[tuple[FuzzyVariable, ...], FuzzyVariable] | None = None,
) -> tuple[RuleBase, list[float]]:
    """Evolve a rule base minimizing training MAPE.

    Returns the best decoded rule base seen across all generations and the
    best-so-far fitness history (index 0 is the initial random population).
    """
    if len(train) == 0:
        raise EmptyTrainError("evolve needs a nonempty training set")
    rng = np.random.default_rng(cfg.seed)
    evaluator = _PopulationEvaluator(train, variables, cfg.samples)

    population = [random_chromosome(rng) for _ in range(cfg.population_size)]
    best_rule_base, best_fit = evaluator.decode_and_fitness(population)
    best_population = list(population)
    history = [best_fit]

    for _ in range(cfg.generations):
        next_population = list(best_population[: cfg.elitism_count])
        while len(next_population) < cfg.population_size:
            parent_a = _tournament(population, rng)
            parent_b = _tournament(population, rng)
            child_a, child_b = crossover(parent_a, parent_b, rng, cfg.crossover_prob)
            next_population.append(mutate(child_a, rng, cfg.mutation_prob))
            if len(next_population) < cfg.population_size:
                next_population.append(mutate(child_b, rng, cfg.mutation_prob))
        population = next_population
        rule_base, fit = evaluator.decode_and_fitness(population)
        if fit < best_fit:
            best_rule_base, best_fit = rule_base, fit
            best_population = list(population)
        history.append(best_fit)

    return best_rule_base, history


class GeneticFuzzyPredictor(Predictor):
    """Zoo wrapper around the evolutionary rule search."""

    model_kind = "genetic_fuzzy"

    def __init__(self, config: GAConfig | None = None):
        super().__init__()
        self.config = config or GAConfig()
        self.rule_base: RuleBase | None = None
        self.fallback: float | None = None
        self.history: list[float] = []

    def _fit(self, train: Dataset, y: np.ndarray) -> None:
        self.rule_base, self.history = evolve(self.config, train)
        self.fallback = float(np.mean(train.targets))

    def _predict(self, x: FeatureVector) -> float:
        return infer_detail(
            self.rule_base, x, samples=self.config.samples, fallback=self.fallback
        ).value

    def infer_trace(self, x: FeatureVector) -> InferenceResult:
        return infer_detail(
            self.rule_base, x, samples=self.config.samples, fallback=self.fallback
        )
