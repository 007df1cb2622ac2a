from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

PAST_COLOR = "green"
GT_COLOR = "blue"
PRED_COLOR = "red"


def plot_trajectory(path: Path, past, gt_future, pred_future, title: str = "") -> Path:
    """3D plot of one sequence: past waypoints green, GT future blue, prediction red."""
    past = np.asarray(past, dtype=np.float64).reshape(-1, 3)
    gt = np.asarray(gt_future, dtype=np.float64).reshape(-1, 3)
    pred = np.asarray(pred_future, dtype=np.float64).reshape(-1, 3)
    # futures start from the last observed waypoint
    gt = np.concatenate([past[-1:], gt])
    pred = np.concatenate([past[-1:], pred])

    fig = plt.figure(figsize=(5, 5))
    ax = fig.add_subplot(projection="3d")
    ax.plot(past[:, 0], past[:, 1], past[:, 2], "-o", color=PAST_COLOR, markersize=3, label="past")
    ax.plot(gt[:, 0], gt[:, 1], gt[:, 2], "-o", color=GT_COLOR, markersize=3, label="ground truth")
    ax.plot(pred[:, 0], pred[:, 1], pred[:, 2], "-o", color=PRED_COLOR, markersize=3, label="prediction")
    ax.set_xlabel("x, m")
    ax.set_ylabel("y, m")
    ax.set_zlabel("z, m")
    if title:
        ax.set_title(title)
    ax.legend(loc="upper left", fontsize=8)

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", bbox_inches="tight")
    plt.close(fig)
    return path
