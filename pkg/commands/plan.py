from commands.utils import add_common_args, add_element_args, parse_element, write_report
from protocol.plan_compiler import classify, compile_plan

NAME = 'plan'


def register(subparsers):
    parser = subparsers.add_parser(NAME, help="Compile the measurement plan for one element")
    parser.add_argument('--n', dest='num_qubits', type=int, default=None, help="Number of system qubits")
    add_element_args(parser)
    add_common_args(parser)
    return parser


def run(cfg):
    element = parse_element(cfg)
    plan = compile_plan(element)
    payload = dict(plan.to_json(), teleporter_class=classify(element).label, total_qubits=plan.total_qubits)
    write_report(payload, cfg, NAME)
    return 0
