from .flows import (
    Endpoint,
    InfraNode,
    ReplayCache,
    SessionKey,
    VerifiedMessage,
    batch_verify_frames,
    check_confirm,
    confirm_payload,
    derive_session_key,
    key_confirm,
    make_request,
    shared_secret,
    verify_request,
)
from .frame import HEADER_LEN, Channel, MessageFrame, MsgType, auth_len, certificate_len
from .handshake import Initiator, Responder, run_exchange
from .params import (
    DEFAULT_DELTA_MS,
    Certificate,
    LoginState,
    PublicParams,
    RegistrationAuthority,
    RsuSecret,
    SystemParams,
    TpdRecord,
    infra_key,
    issue_certificate,
    login,
    ra_init,
    register_rsu,
    register_vehicle,
    rsu_id_of,
    vc_id_of,
    vehicle_pid,
    vehicle_secret,
)
