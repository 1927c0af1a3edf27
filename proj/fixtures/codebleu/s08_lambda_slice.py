import jax.numpy as jnp

scale = lambda x, s=2.0: x * s
x = jnp.arange(10)
head, tail = x[:3], x[-3:]
mid = x[2:8:2]
y = scale(mid) if mid.size > 0 else mid
z = not (y.sum() >= 3 and y.min() < 1)
