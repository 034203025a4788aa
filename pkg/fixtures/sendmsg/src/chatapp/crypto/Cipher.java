package chatapp.crypto;

import chatapp.outbox.Sender;

public class Cipher {
    Sender sender;

    public Cipher(Sender sender) {
        this.sender = sender;
    }

    public void encrypt(String body, String key) {
        this.sender.prepare(body);
    }
}
