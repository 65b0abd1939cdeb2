from hashlib import md5

__all__ = ("__version__", "base", "digest")


__version__ = "0.1.0"

base = {
    "name": "icdsynth",
    "version": __version__,
    "description": "Pareto-optimal reprogramming attacks on an ICD tachycardia discriminator",
}


def digest(text: str) -> str:
    """
    Short content hash used to name temporary solver inputs and to key
    single-flight solver invocations.

    :param text: The text to hash.
    :type text: str
    """
    return md5(text.encode("utf-8")).hexdigest()
