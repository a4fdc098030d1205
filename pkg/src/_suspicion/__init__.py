# The internal API layout follows the layers of the backbone:
# alarms and agents are pure, the simulator drives them, and the CLI drives the simulator.
