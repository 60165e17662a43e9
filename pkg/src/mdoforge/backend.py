"""Array backend configuration.

Every numeric module routes jax imports through here so that float64 mode
is enabled before the first jax array is created.  Import order elsewhere
then cannot silently downgrade the precision of gradients.
"""

import os

import jax

jax.config.update("jax_enable_x64", True)
jax.config.update("jax_platform_name", "cpu")

import jax.numpy as jnp  # noqa: E402  (must follow the config update)


def thread_count():
    """Concurrency cap for batched driver work, from MDOFORGE_THREADS.

    Defaults to 1 so repeated runs schedule work identically.
    """
    raw = os.environ.get("MDOFORGE_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


__all__ = ["jax", "jnp", "thread_count"]
