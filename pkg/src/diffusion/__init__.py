from src.diffusion.losses import LossBundle, angle_loss, compute_losses, displacement_loss, latent_mse
from src.diffusion.model import TwinModel
from src.diffusion.partial import LatentSeq, q_sample_partial
from src.diffusion.sampling import posterior_step, reverse_partial, sample_egomotion, sample_htp
from src.diffusion.schedule import Schedule, make_schedule, respace_steps
from src.diffusion.training import LATEST, Trainer, batch_seed, load_model, train_step

__all__ = [
    "LATEST",
    "LatentSeq",
    "LossBundle",
    "Schedule",
    "Trainer",
    "TwinModel",
    "angle_loss",
    "batch_seed",
    "compute_losses",
    "displacement_loss",
    "latent_mse",
    "make_schedule",
    "posterior_step",
    "q_sample_partial",
    "respace_steps",
    "reverse_partial",
    "sample_egomotion",
    "sample_htp",
    "load_model",
    "train_step",
]
