"""Closed-form parameter counts and the enumeration cross-check.

Every architecture gets two independent answers to "how many trainable
scalars": a closed-form formula over the hyperparameters, and a literal
element count over an instantiated weight set.  ``audit_config`` asserts
they agree.

Tied output projections are listed with zero incremental cost so reports
stay honest about what sharing saves.
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import ModelConfig
from .errors import AuditMismatchError, ConfigError
from .training import named_tensor_view


@dataclass
class CountReport:
    """Named subtotals that sum exactly to the grand total."""

    arch: str
    components: list[tuple[str, int]]
    config_echo: dict[str, object]

    @property
    def total(self) -> int:
        return sum(count for _, count in self.components)

    def as_table(self) -> str:
        width = max(len(name) for name, _ in self.components + [("total", 0)])
        lines = [f"parameter count for {self.arch}"]
        lines += [f"  {name.ljust(width)}  {count:>14,}" for name, count in self.components]
        lines.append(f"  {'total'.ljust(width)}  {self.total:>14,}")
        return "\n".join(lines)

    def as_key_values(self) -> str:
        lines = [f"arch={self.arch}"]
        lines += [f"{name}={count}" for name, count in self.components]
        lines.append(f"total={self.total}")
        return "\n".join(lines)


def _transformer_blocks_count(cfg: ModelConfig) -> tuple[int, int, int]:
    """Per-block (attention, feedforward, norms) parameter subtotals."""
    attention = (2 * cfg.M * cfg.d_e * (cfg.d_k + cfg.d_v)
                 + cfg.zeta * (cfg.M * (2 * cfg.d_k + cfg.d_v) + cfg.d_e))
    feedforward = 2 * cfg.d_e * cfg.d_f + cfg.d_e + cfg.d_f
    norms = 4 * cfg.d_e  # two gain/bias pairs
    return attention, feedforward, norms


def count_gpt2(cfg: ModelConfig) -> CountReport:
    if cfg.arch != "gpt2":
        raise ConfigError(f"count_gpt2 expects arch 'gpt2', got {cfg.arch!r}")
    attention, feedforward, norms = _transformer_blocks_count(cfg)
    components = [
        ("embedding", cfg.d_e * cfg.vocab_size),
        ("positional_encoding", cfg.d_e * cfg.max_len),
        ("embedding_layer_norm", 2 * cfg.d_e),
        ("attention", cfg.L * attention),
        ("feedforward", cfg.L * feedforward),
        ("block_layer_norms", cfg.L * norms),
        ("output_projection_tied", 0),
    ]
    return CountReport("gpt2", components, _echo(cfg))


def count_bert(cfg: ModelConfig, include_mlm: bool = False,
               include_nsp: bool = False) -> CountReport:
    if cfg.arch != "bert":
        raise ConfigError(f"count_bert expects arch 'bert', got {cfg.arch!r}")
    attention, feedforward, norms = _transformer_blocks_count(cfg)
    components = [
        ("embedding", cfg.d_e * cfg.vocab_size),
        ("positional_encoding", cfg.d_e * cfg.max_len),
        ("segment_encoding", 2 * cfg.d_e),
        ("embedding_layer_norm", 2 * cfg.d_e),
        ("attention", cfg.L * attention),
        ("feedforward", cfg.L * feedforward),
        ("block_layer_norms", cfg.L * norms),
        ("pooler", cfg.d_e * (cfg.d_e + 1)),
        ("output_projection_tied", 0),
    ]
    if include_mlm:
        components += [
            ("mlm_transform", cfg.d_e * (cfg.d_e + 1)),
            ("mlm_layer_norm", 2 * cfg.d_e),
            ("mlm_output_bias", cfg.vocab_size),
        ]
    if include_nsp:
        components.append(("nsp_head", 2 * (cfg.d_e + 1)))
    return CountReport("bert", components, _echo(cfg))


def count_rnn(cfg: ModelConfig) -> CountReport:
    if cfg.arch != "rnn":
        raise ConfigError(f"count_rnn expects arch 'rnn', got {cfg.arch!r}")
    per_layer = 2 * cfg.d_e ** 2 + cfg.d_e
    components = [
        ("embedding", cfg.d_e * cfg.vocab_size),
        ("recurrent_layers", cfg.L * per_layer),
        ("output_projection_tied", 0),
    ]
    report = CountReport("rnn", components, _echo(cfg))
    report.config_echo["per_layer"] = per_layer
    return report


def count_lstm(cfg: ModelConfig) -> CountReport:
    if cfg.arch != "lstm":
        raise ConfigError(f"count_lstm expects arch 'lstm', got {cfg.arch!r}")
    per_layer = 4 * cfg.d_e * (2 * cfg.d_e + 1)
    components = [
        ("embedding", cfg.d_e * cfg.vocab_size),
        ("recurrent_layers", cfg.L * per_layer),
        ("output_projection_tied", 0),
    ]
    report = CountReport("lstm", components, _echo(cfg))
    report.config_echo["per_layer"] = per_layer
    return report


def count_ffnn(cfg: ModelConfig) -> CountReport:
    if cfg.arch != "ffnn":
        raise ConfigError(f"count_ffnn expects arch 'ffnn', got {cfg.arch!r}")
    d0, n = cfg.d_e, cfg.max_len
    components = [("embedding", d0 * cfg.vocab_size)]
    prev = n * d0
    hidden = 0
    for width in cfg.hidden_dims:
        hidden += width * (prev + 1)
        prev = width
    components.append(("hidden_layers", hidden))
    components.append(("output_projection", cfg.vocab_size * prev))
    return CountReport("ffnn", components, _echo(cfg))


def count_for_config(cfg: ModelConfig, include_mlm: bool = False,
                     include_nsp: bool = False) -> CountReport:
    if cfg.arch == "gpt2":
        return count_gpt2(cfg)
    if cfg.arch == "bert":
        return count_bert(cfg, include_mlm, include_nsp)
    if cfg.arch == "rnn":
        return count_rnn(cfg)
    if cfg.arch == "lstm":
        return count_lstm(cfg)
    return count_ffnn(cfg)


def enumerate_weights(weights) -> int:
    """Literal element count over every named tensor."""
    return int(sum(t.size for t in named_tensor_view(weights).values()))


def audit_config(cfg: ModelConfig, weights) -> CountReport:
    """Assert formula count == enumerated count for a full weight set.

    BERT weight sets always carry the MLM head, pooler, and NSP head, so
    the formula side includes them here.
    """
    report = count_for_config(cfg, include_mlm=True, include_nsp=True)
    enumerated = enumerate_weights(weights)
    if report.total != enumerated:
        raise AuditMismatchError(
            f"closed-form count {report.total} != enumerated count {enumerated} "
            f"for arch {cfg.arch!r}"
        )
    return report


def _echo(cfg: ModelConfig) -> dict[str, object]:
    echo: dict[str, object] = {
        "arch": cfg.arch, "d_e": cfg.d_e,
        "vocab_size": cfg.vocab_size, "max_len": cfg.max_len,
    }
    if cfg.arch in ("gpt2", "bert"):
        echo.update(d_k=cfg.d_k, d_v=cfg.d_v, d_f=cfg.d_f, M=cfg.M, L=cfg.L, zeta=cfg.zeta)
    elif cfg.arch in ("rnn", "lstm"):
        echo.update(L=cfg.L)
    else:
        echo.update(hidden_dims=list(cfg.hidden_dims))
    return echo
