import jax

key = jax.random.PRNGKey(0)
key, sub = jax.random.split(key)
w = jax.random.normal(sub, (4, 8))
b = jax.numpy.zeros((8,))
out = w.T @ jax.numpy.ones((4,)) + b
print(out.shape)
