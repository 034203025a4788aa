package chatapp.msg;

import chatapp.crypto.Cipher;
import chatapp.store.SessionStore;

public class Processor {
    SessionStore store;
    Cipher cipher;

    public Processor(SessionStore store, Cipher cipher) {
        this.store = store;
        this.cipher = cipher;
    }

    public void handleMessage(String text, long timestamp) {
        String key = this.store.profileKey;
        this.cipher.encrypt(text, key);
    }
}
