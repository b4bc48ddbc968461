import os


ROOT_PATH = os.path.dirname(__file__)
DATA_DIR = os.path.join(ROOT_PATH, "data")
