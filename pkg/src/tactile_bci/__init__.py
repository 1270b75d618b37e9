"""Simulator of a six-command tactile P300 brain-computer interface.

Synthetic parietal EEG with somatosensory ERPs is band-pass and notch
filtered, cut into 0-800 ms epochs, decimated by 20 and classified with
stepwise LDA; three-round score averages pick one of six commands that
drive a virtual robot arm.
"""

from .decoder import (SelectionResult, SimulationConfig, decide, run_calibration,
                      run_online)
from .dsp import apply_chain, decimate_epoch, design_chain, extract_epochs
from .evaluation import binomial_tail, confusion, itr_bits, summarize
from .paradigm import (SessionPlan, StimulusEvent, build_round, calibration_plan,
                       online_plan, schedule_selection, session_duration)
from .robot import DEFAULT_TASK, RobotCommand, RobotState, TaskSpec, optimal_script, run_task
from .session_io import Config, load_config, load_session, replay, save_session
from .signal_model import (ChannelLayout, ErpModel, NoiseModel, SignalBuffer, erp_template,
                           generate_background, inject_erp)
from .swlda import Dataset, SwldaModel, score, train

__version__ = "0.1.0"
