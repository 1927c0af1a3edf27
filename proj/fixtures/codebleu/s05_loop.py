def fit(params, data, epochs=10, lr=0.01):
    history = []
    for epoch in range(epochs):
        total = 0.0
        for x, y in data:
            grad = 2 * (params * x - y) * x
            params -= lr * grad
            total += (params * x - y) ** 2
        history.append(total / len(data))
    return params, history
