"""nlmkit: from-scratch neural language models with auditable internals.

Forward passes, losses, and closed-form parameter counts for feedforward,
Elman RNN, LSTM, decoder-transformer (GPT2-style) and encoder-transformer
(BERT-style) language models, plus image-patch and time-series input
adapters, binary weight archives, and a CLI.
"""

from .adapters import patch_embed, patchify, tst_embed, tst_mask, unpatchify
from .archive import load_weights, save_weights
from .attention import build_mask, multi_head_attention, self_attention_head
from .audit import (
    CountReport,
    audit_config,
    count_bert,
    count_ffnn,
    count_for_config,
    count_gpt2,
    count_lstm,
    count_rnn,
    enumerate_weights,
)
from .config import ModelConfig, load_config, parse_config
from .embeddings import add_positions, embed, one_hot, tied_logits
from .ffnn import ffnn_forward, ffnn_generate, ffnn_predict
from .kernels import gelu, layer_norm, matmul, sigmoid, softmax
from .losses import ar_loss, ce_loss, corpus_nll, mlm_corrupt, mlm_loss
from .recurrent import lstm_cell, recurrent_lm_forward, rnn_cell, unroll
from .training import TrainState, gd_step, numerical_gradient, train_toy
from .transformer import (
    bert_forward,
    gpt2_forward,
    greedy_decode,
    mlm_head,
    nsp_head,
    transformer_block,
    transformer_stack,
)
from .vocab import TokenSequence, Vocabulary, detokenize, load_vocab, tokenize
from .weights import assemble_weights, init_weights, tensor_layout, zeros_weights

__version__ = "0.1.0"
