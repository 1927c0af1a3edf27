n = 27
steps = 0
while n != 1:
    if n % 2 == 0:
        n //= 2
    elif n > 100:
        break
    else:
        n = 3 * n + 1
    steps += 1
assert steps > 0, "no steps"
