import numpy as np

from .models import ImageBuffer


def natural_image(size: int, channels: int = 3, seed: int = 0) -> ImageBuffer:
    """Smooth sinusoidal fields with incommensurate periods plus a little seeded texture.

    Adjacent pixels are strongly correlated, the way photographs are, so the
    statistics of a ciphertext can be told apart from those of its plaintext.
    """
    rng = np.random.default_rng(seed)
    rows, cols = np.mgrid[0:size, 0:size].astype(np.float64)
    planes = []
    for c in range(channels):
        field = (
            127.5
            + 62.0 * np.sin(2.0 * np.pi * cols / 61.3 + 0.9 * c)
            + 62.0 * np.cos(2.0 * np.pi * rows / 37.7 + 1.7 * c)
            + rng.uniform(-6.0, 6.0, size=(size, size))
        )
        planes.append(np.clip(np.rint(field), 0, 255).astype(np.uint8))
    return ImageBuffer(data=np.stack(planes))
