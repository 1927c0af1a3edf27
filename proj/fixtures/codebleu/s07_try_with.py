import json


def load(path):
    try:
        with open(path) as f:
            data = json.load(f)
    except (OSError, ValueError) as err:
        print("failed:", err)
        return None
    finally:
        print("done")
    return data
