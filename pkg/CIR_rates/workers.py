import logging
from multiprocessing import Pool

import numpy as np

from .checker import parse_workers

# if you want to control logs uncomment these lines
# import sys
# logging.basicConfig(stream=sys.stdout, level=logging.INFO)  # default logging.WARNING
logger = logging.getLogger(__name__)


def task_rng(seed, index):
    """
    Independent random stream of task `index`. Depends only on (seed, index),
    so a result never depends on how tasks are spread over workers.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(int(index),)))


def run_tasks(func, tasks, workers=None):
    """
    Map func over tasks, in-process for a single worker and through a Pool
    otherwise; results always come back in task order
    """
    workers = parse_workers(workers)
    tasks = list(tasks)
    if workers == 1 or len(tasks) <= 1:
        return [func(task) for task in tasks]
    logger.info(f'{len(tasks)} tasks on {workers} workers')
    with Pool(min(workers, len(tasks))) as p:
        return p.map(func, tasks)


def chunks_of_n(lst, n):
    """
    Yield successive n-sized chunks from lst.
    function from https://stackoverflow.com/a/312464 by Ned Batchelder
    """
    for i in range(0, len(lst), n):
        yield lst[i:i + n]
