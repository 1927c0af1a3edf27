import jax.numpy as jnp

sizes = [2, 4, 8]
arrays = {n: jnp.zeros((n, n)) for n in sizes}
traces = [float(jnp.trace(a)) for a in arrays.values() if a.shape[0] > 2]
flags = {t > 0 for t in traces}
total = sum(x * x for x in traces)
