import jax
import optax


@jax.jit
def train_step(state, batch):
    def loss_fn(params):
        preds = state.apply_fn({"params": params}, batch["x"])
        return ((preds - batch["y"]) ** 2).mean()

    loss, grads = jax.value_and_grad(loss_fn)(state.params)
    state = state.apply_gradients(grads=grads)
    return state, loss
