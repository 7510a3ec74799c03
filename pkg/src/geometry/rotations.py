import numpy as np

AXES = {"x": 0, "y": 1, "z": 2}


def quaternion_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q / np.linalg.norm(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform rotation over SO(3): a normalized 4D Gaussian is a uniform unit quaternion."""
    q = rng.normal(size=4)
    while np.linalg.norm(q) < 1e-12:
        q = rng.normal(size=4)
    return quaternion_to_matrix(q)


def axis_rotation(axis: str, angle: float) -> np.ndarray:
    """Right-handed rotation by ``angle`` radians about a coordinate axis."""
    c, s = np.cos(angle), np.sin(angle)
    k = AXES[axis]
    i, j = [a for a in range(3) if a != k]
    rotation = np.eye(3)
    rotation[i, i], rotation[i, j] = c, -s
    rotation[j, i], rotation[j, j] = s, c
    if k == 1:
        # y keeps the cyclic (z, x) orientation
        rotation = rotation.T
    return rotation


def rotate(coords: np.ndarray, rotation: np.ndarray) -> np.ndarray:
    return coords @ rotation.T
