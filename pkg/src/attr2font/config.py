"""Model and training configuration."""

from dataclasses import dataclass, field, asdict


@dataclass
class ModelConfig:
    """Architecture hyperparameters shared by all network modules.

    Defaults follow the reference setup: 37 attributes, 64-d attribute
    embeddings, 256-d style feature, m=4 style refs, 16 residual blocks,
    64x64 glyphs decoded over 5 scales.
    """

    n_attr: int = 37
    embed_dim: int = 64          # N_e, side of the attention maps
    style_dim: int = 256         # D_s
    m: int = 4                   # style reference glyphs per sample
    n_resblocks: int = 16        # N_rb
    n_chars: int = 52            # N_c, charset size / classifier width
    resolution: int = 64
    levels: int = 5              # L, encoder/decoder scales
    base_width: int = 64         # channel width of the first conv stage
    max_width: int = 512         # channel cap for deep stages
    attn_reduction: int = 8      # squeeze ratio of channel attention

    def __post_init__(self):
        if self.resolution % (2 ** self.levels) != 0:
            raise ValueError(
                f"resolution {self.resolution} not divisible by 2^levels={2 ** self.levels}")
        if self.m < 1 or self.m > self.n_chars:
            raise ValueError(f"m={self.m} must be in [1, n_chars={self.n_chars}]")

    def encoder_widths(self):
        """Channel width of content feature c_i for i = 1..levels."""
        return [min(self.base_width * 2 ** i, self.max_width) for i in range(self.levels)]

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


DEFAULT_LAMBDAS = (5.0, 50.0, 5.0, 5.0, 20.0)


@dataclass
class TrainConfig:
    """Optimization hyperparameters: ADAM at lr 2e-4, betas (0.5, 0.999)."""

    epochs: int = 1
    batch_size: int = 16
    lr: float = 2e-4
    betas: tuple = (0.5, 0.999)
    lambdas: tuple = DEFAULT_LAMBDAS   # weights of l_G, l_pixel, l_char, l_CX, l_attr
    seed: int = 0
    checkpoint_every: int = 1          # epochs between checkpoint writes
    log_every: int = 1                 # steps between loss-log rows
    validation: bool = True            # score held-out labeled fonts each epoch

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if any(w < 0 for w in self.lambdas) or len(self.lambdas) != 5:
            raise ValueError("lambdas must be 5 nonnegative weights")
        self.betas = tuple(self.betas)
        self.lambdas = tuple(float(w) for w in self.lambdas)

    def to_dict(self):
        d = asdict(self)
        d["betas"] = list(self.betas)
        d["lambdas"] = list(self.lambdas)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**d)
